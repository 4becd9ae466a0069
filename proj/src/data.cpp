#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "anongbdt/data.hpp"
#include "anongbdt/prng.hpp"

namespace ag {

void Dataset::validate() const {
  if (X.size() != ids.size() * m) throw std::invalid_argument("dataset: feature matrix shape");
  if (!y.empty() && y.size() != ids.size()) throw std::invalid_argument("dataset: label count");
  for (int v : y)
    if (v != 0 && v != 1) throw std::invalid_argument("dataset: labels must be 0 or 1");
  std::unordered_set<u64> seen;
  for (u64 id : ids) {
    if (id >= ~u64(0) - 1) throw std::invalid_argument("dataset: id collides with a reserved value");
    if (!seen.insert(id).second) throw std::invalid_argument("dataset: duplicate id " + std::to_string(id));
  }
}

Dataset Dataset::rows(const std::vector<std::size_t>& idx) const {
  Dataset d;
  d.m = m;
  d.names = names;
  for (std::size_t i : idx) {
    d.ids.push_back(ids.at(i));
    d.X.insert(d.X.end(), X.begin() + i * m, X.begin() + (i + 1) * m);
    if (labeled()) d.y.push_back(y[i]);
  }
  return d;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw CsvError(path + ": empty file");
  auto head = split_csv(line);
  if (head.size() < 1) throw CsvError(path + ":1: missing id column");
  int label_col = -1;
  Dataset d;
  for (std::size_t c = 1; c < head.size(); ++c) {
    if (head[c] == "label" || head[c] == "y") {
      if (label_col >= 0) throw CsvError(path + ":1: two label columns");
      label_col = int(c);
    } else {
      d.names.push_back(head[c]);
    }
  }
  d.m = d.names.size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    auto where = path + ":" + std::to_string(lineno) + ": ";
    if (cells.size() != head.size())
      throw CsvError(where + "expected " + std::to_string(head.size()) + " fields, got " + std::to_string(cells.size()));
    try {
      std::size_t used = 0;
      u64 id = std::stoull(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("id");
      d.ids.push_back(id);
      for (std::size_t c = 1; c < cells.size(); ++c) {
        double v = std::stod(cells[c], &used);
        if (used != cells[c].size() || !std::isfinite(v)) throw std::invalid_argument("value");
        if (int(c) == label_col) {
          if (v != 0 && v != 1) throw std::invalid_argument("label");
          d.y.push_back(int(v));
        } else {
          d.X.push_back(v);
        }
      }
    } catch (const std::logic_error&) {
      throw CsvError(where + "malformed value");
    }
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw CsvError(path + ": " + e.what());
  }
  return d;
}

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path);
  out << "id";
  for (std::size_t f = 0; f < d.m; ++f) out << "," << (f < d.names.size() ? d.names[f] : "x" + std::to_string(f));
  if (d.labeled()) out << ",label";
  out << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.n(); ++i) {
    out << d.ids[i];
    for (std::size_t f = 0; f < d.m; ++f) out << "," << d.x(i, f);
    if (d.labeled()) out << "," << d.y[i];
    out << "\n";
  }
}

SyntheticPair gen_synthetic(std::size_t n0, std::size_t n1, std::size_t m0, std::size_t m1, double overlap, u64 seed,
                            double noise) {
  if (overlap < 0 || overlap > 1) throw std::invalid_argument("gen_synthetic: overlap must be in [0, 1]");
  Prg g(seed, "synthetic");
  SyntheticPair sp;
  sp.common = std::size_t(std::llround(overlap * double(std::min(n0, n1))));
  const std::size_t total = n0 + n1 - sp.common, m = m0 + m1;
  std::unordered_set<u64> seen;
  std::vector<u64> ids;
  while (ids.size() < total) {
    u64 id = 1 + g.uniform(u64(1) << 40);
    if (seen.insert(id).second) ids.push_back(id);
  }
  sp.rule.resize(m);
  for (auto& w : sp.rule) w = g.normal();
  // Features of every id exist for both parties; each party keeps its own columns.
  std::vector<double> X(total * m);
  std::vector<int> y(total);
  for (std::size_t i = 0; i < total; ++i) {
    double s = 0;
    for (std::size_t f = 0; f < m; ++f) {
      X[i * m + f] = g.normal();
      s += sp.rule[f] * X[i * m + f];
    }
    y[i] = s > 0;
    if (g.uniform01() < noise) y[i] ^= 1;
  }
  // ids[0, common) are shared; party 0 then takes the next n0 - common, party 1 the rest.
  std::vector<std::size_t> r0(total), r1;
  std::iota(r0.begin(), r0.end(), 0);
  r0.resize(n0);
  for (std::size_t i = 0; i < sp.common; ++i) r1.push_back(i);
  for (std::size_t i = n0; i < total; ++i) r1.push_back(i);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[g.uniform(i)]);
  };
  shuffle(r0);
  shuffle(r1);
  auto build = [&](const std::vector<std::size_t>& rows, std::size_t f0, std::size_t fm, bool labels) {
    Dataset d;
    d.m = fm;
    for (std::size_t f = 0; f < fm; ++f) d.names.push_back("f" + std::to_string(f0 + f));
    for (std::size_t r : rows) {
      d.ids.push_back(ids[r]);
      for (std::size_t f = 0; f < fm; ++f) d.X.push_back(X[r * m + f0 + f]);
      if (labels) d.y.push_back(y[r]);
    }
    return d;
  };
  sp.d0 = build(r0, 0, m0, true);
  sp.d1 = build(r1, m0, m1, false);
  return sp;
}

double f1_score(const std::vector<double>& p, const std::vector<int>& y, double threshold) {
  if (p.size() != y.size()) throw std::invalid_argument("f1_score: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    bool pred = p[i] >= threshold;
    tp += pred && y[i] == 1;
    fp += pred && y[i] == 0;
    fn += !pred && y[i] == 1;
  }
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * double(tp) / double(2 * tp + fp + fn);
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, int k, u64 seed) {
  if (k < 2) throw std::invalid_argument("kfold: need at least two folds");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Prg g(seed, "kfold");
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[g.uniform(i)]);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace ag
