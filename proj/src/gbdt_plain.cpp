#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "anongbdt/gbdt.hpp"

namespace ag {

void TrainConfig::validate() const {
  if (T < 1) throw std::invalid_argument("config: T must be >= 1");
  if (D < 2 || D > 7) throw std::invalid_argument("config: D must be in [2, 7]");
  if (B < 2) throw std::invalid_argument("config: B must be >= 2");
  if (!(alpha > 0)) throw std::invalid_argument("config: alpha must be > 0");
  if (gamma < 0) throw std::invalid_argument("config: gamma must be >= 0");
  if (!(shrinkage > 0)) throw std::invalid_argument("config: shrinkage must be > 0");
}

int Binning::bin(std::size_t f, double x) const {
  const auto& e = edges.at(f);
  return int(std::lower_bound(e.begin(), e.end(), x) - e.begin());
}

double Binning::threshold(std::size_t f, int u) const {
  const auto& e = edges.at(f);
  if (u < 0 || u >= B) throw std::out_of_range("Binning::threshold");
  return u == B - 1 ? std::numeric_limits<double>::infinity() : e[u];
}

Binning fit_bins(const Dataset& d, int B) {
  if (B < 2) throw std::invalid_argument("fit_bins: B must be >= 2");
  Binning b;
  b.B = B;
  b.edges.resize(d.m);
  const std::size_t n = d.n();
  std::vector<double> col(n);
  for (std::size_t f = 0; f < d.m; ++f) {
    for (std::size_t i = 0; i < n; ++i) col[i] = d.x(i, f);
    std::sort(col.begin(), col.end());
    auto& e = b.edges[f];
    for (int t = 0; t + 1 < B; ++t) {
      if (n == 0) {
        e.push_back(0.0);
        continue;
      }
      std::size_t r = (std::size_t(t + 1) * n + B - 1) / std::size_t(B);
      e.push_back(col[std::min(n, std::max<std::size_t>(r, 1)) - 1]);
    }
  }
  return b;
}

std::vector<std::vector<int>> bin_columns(const Dataset& d, const Binning& b) {
  if (b.edges.size() != d.m) throw std::invalid_argument("bin_columns: binning does not match the dataset");
  std::vector<std::vector<int>> out(d.m, std::vector<int>(d.n()));
  for (std::size_t f = 0; f < d.m; ++f)
    for (std::size_t i = 0; i < d.n(); ++i) out[f][i] = b.bin(f, d.x(i, f));
  return out;
}

std::pair<BitMatrix, BitMatrix> bin_matrices(const std::vector<std::vector<int>>& bins, int B) {
  BitMatrix M, Mt;
  const std::size_t m = bins.size(), n = m ? bins[0].size() : 0;
  M.rows = Mt.rows = m * B;
  M.cols = Mt.cols = n;
  M.bits.assign(M.rows * n, 0);
  Mt.bits.assign(M.rows * n, 0);
  for (std::size_t z = 0; z < m; ++z)
    for (std::size_t i = 0; i < n; ++i) {
      const int u0 = bins[z][i];
      M.bits[(z * B + u0) * n + i] = 1;
      for (int u = u0; u < B; ++u) Mt.bits[(z * B + u) * n + i] = 1;
    }
  return {M, Mt};
}

JointData join_common(const Dataset& d0, const Dataset& d1, const Binning& b0, const Binning& b1) {
  JointData J;
  J.B = b0.B;
  if (b1.B != b0.B) throw std::invalid_argument("join_common: bin counts differ");
  std::unordered_map<u64, std::size_t> at1;
  for (std::size_t i = 0; i < d1.n(); ++i) at1[d1.ids[i]] = i;
  J.m = d0.m + d1.m;
  J.bins.resize(J.m);
  for (std::size_t i = 0; i < d0.n(); ++i) {
    auto it = at1.find(d0.ids[i]);
    if (it == at1.end()) continue;
    for (std::size_t f = 0; f < d0.m; ++f) J.bins[f].push_back(b0.bin(f, d0.x(i, f)));
    for (std::size_t f = 0; f < d1.m; ++f) J.bins[d0.m + f].push_back(b1.bin(f, d1.x(it->second, f)));
    J.y.push_back(d0.labeled() ? d0.y[i] : 0);
    ++J.n;
  }
  return J;
}

double split_score(double GL, double HL, double GR, double HR, double alpha) {
  return GL * GL / (HL + alpha) + GR * GR / (HR + alpha);
}

namespace {

constexpr double kScale = double(1 << 20);

// Leaf index reached by sample i, following the tree's global splits.
int leaf_of(const PlainTree& t, const JointData& J, std::size_t i, int D) {
  int k = 1;
  for (int d = 1; d < D; ++d) k = 2 * k + (J.bins[t.feature[k]][i] <= t.bin[k] ? 0 : 1);
  return k - (1 << (D - 1));
}

}  // namespace

PlainModel train_plain(const JointData& J, const TrainConfig& cfg) {
  cfg.validate();
  const int D = cfg.D, B = cfg.B;
  const std::size_t n = J.n, m = J.m;
  const SigmoidParams sp = SigmoidParams::ours();
  PlainModel model;
  model.cfg = cfg;
  std::vector<double> yt(n, 0.0);
  std::vector<i64> g(n), h(n);
  std::vector<int> node(n);
  for (int t = 0; t < cfg.T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      // Same arithmetic as the shared computation: p on the fixed-point grid, h = floor(p (1 - p)).
      i64 p = std::llround(sigmoid_approx(yt[i], sp) * kScale);
      g[i] = p - (J.y[i] ? i64(kScale) : 0);
      h[i] = i64((i64(p) * (i64(kScale) - p)) >> 20);
      node[i] = 1;
    }
    PlainTree tree;
    tree.feature.assign(std::size_t(1) << (D - 1), -1);
    tree.bin.assign(std::size_t(1) << (D - 1), -1);
    for (int d = 1; d < D; ++d) {
      const int first = 1 << (d - 1), count = first;
      std::vector<i64> G(std::size_t(count) * m * B, 0), H(G.size(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = std::size_t(node[i] - first) * m * B;
        for (std::size_t z = 0; z < m; ++z) {
          G[base + z * B + J.bins[z][i]] += g[i];
          H[base + z * B + J.bins[z][i]] += h[i];
        }
      }
      for (int k = first; k < first + count; ++k) {
        const std::size_t base = std::size_t(k - first) * m * B;
        double best = -std::numeric_limits<double>::infinity();
        int bz = 0, bu = 0;
        for (std::size_t z = 0; z < m; ++z) {
          i64 tg = 0, th = 0;
          for (int u = 0; u < B; ++u) {
            tg += G[base + z * B + u];
            th += H[base + z * B + u];
          }
          i64 gl = 0, hl = 0;
          for (int u = 0; u < B; ++u) {
            gl += G[base + z * B + u];
            hl += H[base + z * B + u];
            double s = split_score(gl / kScale, hl / kScale, (tg - gl) / kScale, (th - hl) / kScale, cfg.alpha);
            if (s > best) {
              best = s;
              bz = int(z);
              bu = u;
            }
          }
        }
        tree.feature[k] = bz;
        tree.bin[k] = bu;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const int k = node[i];
        node[i] = 2 * k + (J.bins[tree.feature[k]][i] <= tree.bin[k] ? 0 : 1);
      }
    }
    const int leaves = 1 << (D - 1);
    std::vector<i64> G(leaves, 0), H(leaves, 0);
    for (std::size_t i = 0; i < n; ++i) {
      G[node[i] - leaves] += g[i];
      H[node[i] - leaves] += h[i];
    }
    tree.leaf.resize(leaves);
    for (int l = 0; l < leaves; ++l) tree.leaf[l] = cfg.shrinkage * (-(G[l] / kScale) / (H[l] / kScale + cfg.alpha));
    for (std::size_t i = 0; i < n; ++i) yt[i] += tree.leaf[node[i] - leaves];
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::vector<double> predict_plain(const PlainModel& M, const JointData& J) {
  const SigmoidParams sp = SigmoidParams::ours();
  std::vector<double> p(J.n);
  for (std::size_t i = 0; i < J.n; ++i) {
    double s = 0;
    for (const auto& t : M.trees) s += t.leaf[leaf_of(t, J, i, M.cfg.D)];
    p[i] = sigmoid_approx(s, sp);
  }
  return p;
}

// ---- model file ----
//
// Little-endian: "AGBM" | u32 version | u32 party | i32 T, D, B | f64 alpha, gamma, shrinkage |
// u64 m_local, m_peer | per tree: per internal node k = 1 .. 2^(D-1)-1 { i8 owner, i32 feature,
// i32 bin, f64 threshold } then 2^(D-1) u64 leaf-weight shares.

namespace {

template <class T>
void put(Bytes& b, T v) {
  const u8* p = reinterpret_cast<const u8*>(&v);
  b.insert(b.end(), p, p + sizeof(T));
}

template <class T>
T get(const Bytes& b, std::size_t& pos) {
  if (pos + sizeof(T) > b.size()) throw std::runtime_error("model file truncated");
  T v;
  std::memcpy(&v, b.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

Bytes PartyModel::serialize() const {
  Bytes b{'A', 'G', 'B', 'M'};
  put<u32>(b, 1);
  put<u32>(b, u32(party));
  put<int32_t>(b, cfg.T);
  put<int32_t>(b, cfg.D);
  put<int32_t>(b, cfg.B);
  put<double>(b, cfg.alpha);
  put<double>(b, cfg.gamma);
  put<double>(b, cfg.shrinkage);
  put<u64>(b, m_local);
  put<u64>(b, m_peer);
  const std::size_t internal = std::size_t(1) << (cfg.D - 1);
  for (const auto& t : trees) {
    for (std::size_t k = 1; k < internal; ++k) {
      const NodeSplit& s = t.nodes.at(k);
      put<int8_t>(b, int8_t(s.owner));
      put<int32_t>(b, s.feature);
      put<int32_t>(b, s.bin);
      put<double>(b, s.threshold);
    }
    for (std::size_t l = 0; l < internal; ++l) put<u64>(b, t.leaf.at(l));
  }
  return b;
}

PartyModel PartyModel::deserialize(const Bytes& b) {
  if (b.size() < 8 || std::memcmp(b.data(), "AGBM", 4) != 0) throw std::runtime_error("not a model file");
  std::size_t pos = 4;
  if (get<u32>(b, pos) != 1) throw std::runtime_error("unsupported model version");
  PartyModel M;
  M.party = int(get<u32>(b, pos));
  M.cfg.T = get<int32_t>(b, pos);
  M.cfg.D = get<int32_t>(b, pos);
  M.cfg.B = get<int32_t>(b, pos);
  M.cfg.alpha = get<double>(b, pos);
  M.cfg.gamma = get<double>(b, pos);
  M.cfg.shrinkage = get<double>(b, pos);
  M.cfg.validate();
  M.m_local = get<u64>(b, pos);
  M.m_peer = get<u64>(b, pos);
  const std::size_t internal = std::size_t(1) << (M.cfg.D - 1);
  for (int t = 0; t < M.cfg.T; ++t) {
    PartyTree tr;
    tr.nodes.resize(internal);
    for (std::size_t k = 1; k < internal; ++k) {
      NodeSplit& s = tr.nodes[k];
      s.owner = get<int8_t>(b, pos);
      s.feature = get<int32_t>(b, pos);
      s.bin = get<int32_t>(b, pos);
      s.threshold = get<double>(b, pos);
    }
    tr.leaf.resize(internal);
    for (auto& w : tr.leaf) w = get<u64>(b, pos);
    M.trees.push_back(std::move(tr));
  }
  if (pos != b.size()) throw std::runtime_error("trailing bytes in model file");
  return M;
}

std::string PartyModel::hash_hex() const {
  crypto_init();
  Bytes b = serialize();
  u8 h[32];
  crypto_generichash(h, sizeof(h), b.data(), b.size(), nullptr, 0);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (u8 c : h) {
    s += hex[c >> 4];
    s += hex[c & 15];
  }
  return s;
}

}  // namespace ag
