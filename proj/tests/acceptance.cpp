// Acceptance checks. Usage: acceptance [criterion numbers...] (default: all).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "anongbdt/gbdt.hpp"
#include "anongbdt/runner.hpp"
#include "anongbdt/sync.hpp"

using namespace ag;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const HeContext& he() {
  static HeContext c;
  return c;
}

u64 total_bytes(const PairRun& r) { return r.report[0].total() + r.report[1].total(); }

// ---- 1: sigmoid accuracy ----

Outcome sigmoid_accuracy() {
  std::vector<double> xs;
  for (int i = -560; i <= 560; ++i) xs.push_back(i * 0.01);
  Shares x;
  for (double v : xs) x.push_back(encode_fixed(v));
  Prg g(11);
  auto [s0, s1] = share_arith(x, g);
  Shares out[2];
  run_pair([&](Party& P) { out[P.id] = sigmoid(P, P.id ? s1 : s0, SigmoidParams::ours()); });
  auto y = reconstruct_arith(out[0], out[1]);
  double mx = 0, sum = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = std::fabs(decode_fixed(y[i]) - 1.0 / (1.0 + std::exp(-xs[i])));
    mx = std::max(mx, e);
    sum += e;
  }
  double mean = sum / double(xs.size());
  return {mx <= 0.016 && mean <= 0.004, fmt("max error %.5f (<= 0.016), mean %.5f (<= 0.004) over %zu points", mx,
                                            mean, xs.size())};
}

// ---- 2 and 3: packing ----

const KeyMaterial& keys() {
  static KeyMaterial k = [] {
    Prg g(4242);
    return keygen(he(), g);
  }();
  return k;
}

struct PackRun {
  bool fast_ok = true, base_ok = true, same = true;
  double fast_s = 0, base_s = 0;
  u64 fast_ks = 0, base_ks = 0;
};

PackRun pack_once(int cnt, Prg& rng) {
  const auto& ctx = he();
  const int LD = ctx.params().log_delta(), Ns = ctx.params().N_small, N = ctx.params().N;
  int tau = 0;
  while ((1 << tau) < cnt) ++tau;
  std::vector<u64> m(cnt);
  for (auto& v : m) v = rng.next();
  std::vector<Lwe> small;
  for (u64 v : m) small.push_back(lwe_encrypt(ctx, keys().sk, Ns, v, LD - tau, rng));
  PackRun r;
  u64 k0 = ctx.counters().keyswitch;
  auto t0 = Clock::now();
  Rlwe f = fast_pack_lwes(ctx, small, keys().ev);
  r.fast_s = seconds_since(t0);
  r.fast_ks = ctx.counters().keyswitch - k0;
  k0 = ctx.counters().keyswitch;
  t0 = Clock::now();
  std::vector<Lwe> lifted;
  for (const auto& s : small) lifted.push_back(lwe_dim_lift(ctx, s, keys().ev));
  Rlwe b = pack_lwes(ctx, lifted, keys().ev);
  r.base_s = seconds_since(t0);
  r.base_ks = ctx.counters().keyswitch - k0;
  auto fd = rlwe_decrypt(ctx, keys().sk, f, LD), bd = rlwe_decrypt(ctx, keys().sk, b, LD);
  auto fs = slot_map_fast(N, cnt), bs = slot_map_baseline(N, cnt);
  for (int i = 0; i < cnt; ++i) {
    r.fast_ok &= fd[fs[i]] == m[i];
    r.base_ok &= bd[bs[i]] == m[i];
    r.same &= fd[fs[i]] == bd[bs[i]];
  }
  return r;
}

Outcome packing_correctness() {
  Prg rng(21);
  bool ok = true;
  std::string bad;
  for (int cnt = 2; cnt <= 256; cnt *= 2) {
    PackRun r = pack_once(cnt, rng);
    if (!(r.fast_ok && r.base_ok && r.same)) {
      ok = false;
      bad += fmt(" %d", cnt);
    }
  }
  return {ok, ok ? "2..256 inputs: fast and baseline slots decrypt to the inputs and agree"
                 : "mismatch at counts:" + bad};
}

Outcome packing_speed() {
  Prg rng(31);
  bool ok = true;
  std::string d;
  for (int cnt : {128, 512}) {
    // Best of three for each path to damp scheduler noise.
    double fast = 1e9, base = 1e9;
    u64 fks = 0, bks = 0;
    for (int rep = 0; rep < 3; ++rep) {
      PackRun r = pack_once(cnt, rng);
      ok &= r.fast_ok && r.base_ok;
      fast = std::min(fast, r.fast_s);
      base = std::min(base, r.base_s);
      fks = r.fast_ks;
      bks = r.base_ks;
    }
    double tr = fast / base, kr = double(fks) / double(bks);
    ok &= tr <= 0.6 && kr <= 0.55;
    d += fmt("%s%d inputs: time %.3fs vs %.3fs (ratio %.2f <= 0.6), key switches %llu vs %llu (ratio %.3f <= 0.55)",
             d.empty() ? "" : "; ", cnt, fast, base, tr, (unsigned long long)fks, (unsigned long long)bks, kr);
  }
  return {ok, d};
}

// ---- 4 and 5: oracle equivalence and reveal log ----

struct Instance {
  SyntheticPair sp;
  TrainConfig cfg;
  u64 seed;
};

Instance make_instance(u64 seed) {
  Prg g(seed, "acceptance-instance");
  Instance in;
  in.seed = seed;
  const std::size_t n0 = 300 + g.uniform(1701), n1 = 300 + g.uniform(1701);
  const double overlap = 0.4 + 0.4 * g.uniform01();
  const std::size_t m = 2 + g.uniform(7);
  in.sp = gen_synthetic(n0, n1, m, m, overlap, seed);
  in.cfg.B = 8;
  in.cfg.D = 2 + int(g.uniform(3));
  in.cfg.T = 1 + int(g.uniform(3));
  return in;
}

struct TrainedPair {
  PartyModel model[2];
  PairRun run;
};

void train_both(TrainedPair& t, const SyntheticPair& sp, const TrainConfig& cfg, Protocol proto, u64 seed,
                RevealLog* log) {
  TrainOptions opt;
  opt.protocol = proto;
  opt.hp.seed = seed;
  opt.he = &he();
  t.run = run_pair([&](Party& P) { t.model[P.id] = train(P, P.id ? sp.d1 : sp.d0, cfg, opt); }, seed, seed + 1, log);
}

std::vector<double> weights(const TrainedPair& t, std::size_t tree) {
  std::vector<double> w;
  for (u64 v : reconstruct_arith(t.model[0].trees[tree].leaf, t.model[1].trees[tree].leaf)) w.push_back(decode_fixed(v));
  return w;
}

// Plaintext traversal through the owners' thresholds on raw features.
double plain_score(const TrainedPair& t, const Dataset& d0, std::size_t r0, const Dataset& d1, std::size_t r1) {
  const int D = t.model[0].cfg.D;
  const std::size_t internal = std::size_t(1) << (D - 1);
  double s = 0;
  for (std::size_t tr = 0; tr < t.model[0].trees.size(); ++tr) {
    std::size_t k = 1;
    while (k < internal) {
      const int o = t.model[0].trees[tr].nodes[k].owner;
      const NodeSplit& ns = t.model[o].trees[tr].nodes[k];
      const double x = o == 0 ? d0.x(r0, ns.feature) : d1.x(r1, ns.feature);
      k = 2 * k + (x <= ns.threshold ? 0 : 1);
    }
    s += weights(t, tr)[k - internal];
  }
  return s;
}

struct EquivStats {
  std::size_t instances = 0, split_mismatch = 0, splits = 0;
  double max_rel = 0, max_abs = 0, max_dp = 0;
  std::size_t weight_fail = 0, infer_fail = 0;
  double seconds = 0;
  std::vector<RevealEntry> train_log, infer_log;
  std::vector<std::string> notes;
};

// Leaf weights: relative error 2^-12, with the denominator floored at 2^-8 so that weights of leaves
// whose gradient sum is zero up to rounding are compared on an absolute scale.
bool weight_ok(double got, double want, EquivStats& st) {
  double abs = std::fabs(got - want), rel = abs / std::max(std::fabs(want), 1.0 / 256);
  st.max_abs = std::max(st.max_abs, abs);
  st.max_rel = std::max(st.max_rel, rel);
  return rel <= 1.0 / 4096;
}

EquivStats& equivalence_runs() {
  static EquivStats st;
  static bool done = false;
  if (done) return st;
  done = true;
  auto t0 = Clock::now();
  for (u64 seed = 1; seed <= 20; ++seed) {
    Instance in = make_instance(seed);
    Binning b0 = fit_bins(in.sp.d0, in.cfg.B), b1 = fit_bins(in.sp.d1, in.cfg.B);
    JointData J = join_common(in.sp.d0, in.sp.d1, b0, b1);
    PlainModel ref = train_plain(J, in.cfg);
    const std::size_t internal = std::size_t(1) << (in.cfg.D - 1);
    ++st.instances;
    for (Protocol pr : {Protocol::Base, Protocol::Otsa}) {
      RevealLog log;
      TrainedPair t;
      train_both(t, in.sp, in.cfg, pr, seed * 100 + int(pr), &log);
      for (auto& e : log.entries()) st.train_log.push_back(e);
      for (int tr = 0; tr < in.cfg.T; ++tr) {
        for (std::size_t k = 1; k < internal; ++k) {
          const int o = t.model[0].trees[tr].nodes[k].owner;
          const NodeSplit& ns = t.model[o].trees[tr].nodes[k];
          const int gf = (o == 0 ? 0 : int(in.sp.d0.m)) + ns.feature;
          ++st.splits;
          if (gf != ref.trees[tr].feature[k] || ns.bin != ref.trees[tr].bin[k]) {
            ++st.split_mismatch;
            st.notes.push_back(fmt("seed %llu %s tree %d node %zu: got (%d,%d) want (%d,%d)",
                                   (unsigned long long)seed, pr == Protocol::Base ? "base" : "otsa", tr, k, gf, ns.bin,
                                   ref.trees[tr].feature[k], ref.trees[tr].bin[k]));
          }
        }
        auto w = weights(t, tr);
        for (std::size_t l = 0; l < w.size(); ++l)
          if (!weight_ok(w[l], ref.trees[tr].leaf[l], st)) {
            ++st.weight_fail;
            st.notes.push_back(fmt("seed %llu %s tree %d leaf %zu: weight %.6f, reference %.6f",
                                   (unsigned long long)seed, pr == Protocol::Base ? "base" : "otsa", tr, l, w[l],
                                   ref.trees[tr].leaf[l]));
          }
      }

      // Inference on a fresh batch of 500 rows per party with new identifiers.
      auto fresh = gen_synthetic(500, 500, in.sp.d0.m, in.sp.d1.m, 0.6, seed + 1000);
      HashingParams hp;
      hp.seed = seed + 5000;
      std::vector<double> p[2];
      RevealLog ilog;
      run_pair([&](Party& P) { p[P.id] = infer(P, P.id ? fresh.d1 : fresh.d0, t.model[P.id], hp); }, seed + 7,
               seed + 8, &ilog);
      for (auto& e : ilog.entries()) st.infer_log.push_back(e);
      std::unordered_map<u64, std::size_t> at1;
      for (std::size_t i = 0; i < fresh.d1.n(); ++i) at1[fresh.d1.ids[i]] = i;
      const SigmoidParams sp = SigmoidParams::ours();
      for (std::size_t i = 0; i < fresh.d0.n(); ++i) {
        auto it = at1.find(fresh.d0.ids[i]);
        double want = it == at1.end() ? 0.5 : sigmoid_approx(plain_score(t, fresh.d0, i, fresh.d1, it->second), sp);
        double dp = std::fabs(p[0][i] - want);
        st.max_dp = std::max(st.max_dp, dp);
        if (dp > 0.02) ++st.infer_fail;
      }
    }
    std::printf("  instance %2llu: n0=%zu n1=%zu common=%zu m=%zu+%zu D=%d T=%d (%.0fs elapsed)\n",
                (unsigned long long)seed, in.sp.d0.n(), in.sp.d1.n(), in.sp.common, in.sp.d0.m, in.sp.d1.m, in.cfg.D,
                in.cfg.T, seconds_since(t0));
    std::fflush(stdout);
  }
  st.seconds = seconds_since(t0);
  return st;
}

Outcome oracle_equivalence() {
  EquivStats& st = equivalence_runs();
  bool ok = st.split_mismatch == 0 && st.weight_fail == 0 && st.infer_fail == 0;
  std::string d = fmt(
      "%zu instances x {base, otsa}: %zu/%zu splits differ, leaf weights max rel err %.2e (<= 2^-12, %zu over), "
      "inference max |dp| %.4f (<= 0.02, %zu over), %.0fs",
      st.instances, st.split_mismatch, st.splits, st.max_rel, st.weight_fail, st.max_dp, st.infer_fail, st.seconds);
  for (std::size_t i = 0; i < std::min<std::size_t>(st.notes.size(), 12); ++i) d += "\n    " + st.notes[i];
  return {ok, d};
}

Outcome reveal_ledger() {
  EquivStats& st = equivalence_runs();
  std::size_t bits = 0, splits = 0, bad = 0;
  for (const auto& e : st.train_log) {
    if (e.kind == "owner_bit" && e.to_party == -1) {
      for (i64 v : e.values) bad += v != 0 && v != 1;
      bits += e.values.size();
    } else if (e.kind == "owner_split" && (e.to_party == 0 || e.to_party == 1) && e.values.size() == 2) {
      bad += e.values[0] < 0 || e.values[0] >= 8 || e.values[1] < 0 || e.values[1] >= 8;
      ++splits;
    } else {
      ++bad;
    }
  }
  std::size_t infer_bad = 0;
  for (const auto& e : st.infer_log) infer_bad += e.kind != "inference_output" || e.to_party != 0;
  bool ok = bad == 0 && infer_bad == 0 && bits == splits && bits > 0;
  return {ok, fmt("training reveals: %zu owner bits, %zu owner-side splits, %zu other entries; inference reveals "
                  "only the output scores to party 0 (%zu other entries)",
                  bits, splits, bad, infer_bad)};
}

// ---- 6: indicator algebra ----

struct World {
  std::vector<u64> ids[2];
  std::array<Alignment, 2> A[2];
  BitVec root[2];
};

World make_world(std::size_t n0, std::size_t n1, std::size_t common, u64 seed) {
  World w;
  Prg g(seed, "world");
  std::set<u64> s;
  while (s.size() < n0 + n1 - common) s.insert(g.next() >> 4);
  std::vector<u64> all(s.begin(), s.end());
  for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[g.uniform(i)]);
  w.ids[0].assign(all.begin(), all.begin() + n0);
  w.ids[1].assign(all.begin(), all.begin() + common);
  w.ids[1].insert(w.ids[1].end(), all.begin() + n0, all.end());
  HashingParams hp;
  hp.seed = seed;
  run_pair([&](Party& P) { w.A[P.id] = dual_circuit_psi(P, PsiInput{w.ids[P.id], nullptr}, hp); });
  for (int i = 0; i < 2; ++i) w.root[i] = reconstruct_bool(w.A[0][i].b, w.A[1][i].b);
  return w;
}

Outcome indicator_algebra() {
  std::size_t trees = 0, nodes = 0, violations = 0;
  for (u64 seed = 1; seed <= 50; ++seed) {
    Prg g(seed, "indicator-trees");
    const std::size_t n0 = 30 + g.uniform(120), n1 = 30 + g.uniform(120);
    World w = make_world(n0, n1, std::min(n0, n1) / 2 + g.uniform(std::min(n0, n1) / 2), seed);
    const int D = 2 + int(g.uniform(3));
    const std::size_t internal = std::size_t(1) << (D - 1);
    // Random per-item assignments per node; each node gets a random owner.
    std::map<u64, std::vector<u8>> go_left;
    for (int p = 0; p < 2; ++p)
      for (u64 id : w.ids[p]) {
        auto& v = go_left[id];
        if (v.empty())
          for (std::size_t k = 0; k < internal; ++k) v.push_back(u8(g.bit()));
      }
    std::vector<int> owner(internal);
    for (auto& o : owner) o = int(g.bit());
    auto item_at = [&](int i, std::size_t j) { return w.A[i][i].ch.item[j]; };

    // Shared indicators at each party for the batched path, the per-node path and the plaintext oracle.
    std::vector<BitVec> ind[2][2], one[2][2], plain[2];  // [party][instance][node]
    for (int p = 0; p < 2; ++p)
      for (int i = 0; i < 2; ++i) {
        ind[p][i].resize(2 * internal);
        ind[p][i][1] = w.A[p][i].b;
        one[p][i] = ind[p][i];
      }
    for (int i = 0; i < 2; ++i) {
      plain[i].resize(2 * internal);
      plain[i][1] = w.root[i];
    }
    for (int d = 1; d < D; ++d) {
      const std::size_t first = std::size_t(1) << (d - 1);
      for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> which;
        for (std::size_t k = first; k < 2 * first; ++k)
          if (owner[k] == c) which.push_back(k);
        if (which.empty()) continue;
        std::vector<NodeSync> batch[2], single[2];
        for (int p = 0; p < 2; ++p)
          for (std::size_t k : which) {
            NodeSync nb, ns;
            nb.pos = int(k - first);
            ns.pos = 0;
            for (int i = 0; i < 2; ++i) {
              nb.parent[i] = ind[p][i][k];
              ns.parent[i] = one[p][i][k];
            }
            if (p == c) {
              nb.bstar.assign(w.A[c][c].m, 0);
              for (std::size_t j = 0; j < w.A[c][c].m; ++j) {
                u64 it = item_at(c, j);
                if (it != kPadItem) nb.bstar[j] = go_left.at(it)[k];
              }
              ns.bstar = nb.bstar;
            }
            batch[p].push_back(nb);
            single[p].push_back(ns);
          }
        std::vector<NodeChildren> kb[2], ks[2];
        run_pair([&](Party& P) {
          kb[P.id] = bois(P, c, w.A[P.id], batch[P.id]);
          for (const auto& nd : single[P.id]) ks[P.id].push_back(oois(P, c, w.A[P.id], nd));
        }, seed, seed + 3);
        for (std::size_t q = 0; q < which.size(); ++q) {
          const std::size_t k = which[q];
          ++nodes;
          for (int i = 0; i < 2; ++i) {
            for (int p = 0; p < 2; ++p) {
              ind[p][i][2 * k] = kb[p][q].inst[i].left;
              ind[p][i][2 * k + 1] = kb[p][q].inst[i].right;
              one[p][i][2 * k] = ks[p][q].inst[i].left;
              one[p][i][2 * k + 1] = ks[p][q].inst[i].right;
            }
            const BitVec& par = plain[i][k];
            BitVec L(par.size()), R(par.size());
            for (std::size_t j = 0; j < par.size(); ++j) {
              u64 it = item_at(i, j);
              L[j] = par[j] && it != kPadItem ? go_left.at(it)[k] : 0;
              R[j] = par[j] ^ L[j];
            }
            plain[i][2 * k] = L;
            plain[i][2 * k + 1] = R;
            auto bl = reconstruct_bool(ind[0][i][2 * k], ind[1][i][2 * k]);
            auto br = reconstruct_bool(ind[0][i][2 * k + 1], ind[1][i][2 * k + 1]);
            auto ol = reconstruct_bool(one[0][i][2 * k], one[1][i][2 * k]);
            auto orr = reconstruct_bool(one[0][i][2 * k + 1], one[1][i][2 * k + 1]);
            std::size_t pc = 0, lc = 0, rc = 0;
            for (std::size_t j = 0; j < par.size(); ++j) {
              violations += (bl[j] & br[j]) != 0;
              violations += (bl[j] | br[j]) != par[j];
              pc += par[j];
              lc += bl[j];
              rc += br[j];
            }
            violations += pc != lc + rc;
            violations += bl != L || br != R || ol != L || orr != R;
          }
        }
      }
    }
    ++trees;
  }
  return {violations == 0, fmt("%zu random trees, %zu node updates: %zu violations of disjoint cover, popcount "
                               "conservation or batched/per-node/plaintext agreement",
                               trees, nodes, violations)};
}

// ---- 7: communication scaling ----

// Bytes of one BOIS level (two nodes owned by party 1) and of one base OIS sender-path call, for party 1
// features of width mB.
std::pair<u64, u64> sync_bytes(std::size_t m1, int B, u64 seed) {
  auto sp = gen_synthetic(1000, 1000, 2, m1, 0.6, seed);
  Binning b1 = fit_bins(sp.d1, B);
  auto bins1 = bin_columns(sp.d1, b1);
  auto [M, Mt] = bin_matrices(bins1, B);
  HashingParams hp;
  hp.seed = seed;

  std::array<Alignment, 2> A[2];
  run_pair([&](Party& P) { A[P.id] = dual_circuit_psi(P, PsiInput{P.id ? sp.d1.ids : sp.d0.ids, nullptr}, hp); });
  std::vector<NodeSync> nodes[2];
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      NodeSync nd;
      nd.pos = q;
      for (int i = 0; i < 2; ++i) nd.parent[i] = A[p][i].b;
      if (p == 1) {
        nd.bstar.assign(A[1][1].m, 0);
        for (std::size_t j = 0; j < A[1][1].m; ++j) {
          int r = A[1][1].ch.row[j];
          if (r >= 0) nd.bstar[j] = u8(bins1[q][r] <= B / 2);
        }
      }
      nodes[p].push_back(nd);
    }
  PairRun bo = run_pair([&](Party& P) { bois(P, 1, A[P.id], nodes[P.id]); }, seed, seed + 1);

  BasePsiResult R[2];
  std::vector<u64> y(sp.d0.n(), 0);
  run_pair([&](Party& P) {
    R[P.id] = base_circuit_psi(P, PsiInput{P.id ? sp.d1.ids : sp.d0.ids, P.id ? nullptr : &y}, P.id ? &M : nullptr,
                               P.id ? &Mt : nullptr, hp);
  });
  PairRun oi = run_pair([&](Party& P) {
    for (int q = 0; q < 2; ++q) ois(P, 1, R[P.id].inst.b, R[P.id].Mt1, nullptr, P.id ? q * B + B / 2 : -1);
  }, seed, seed + 1);
  return {total_bytes(bo), total_bytes(oi)};
}

Outcome communication_scaling() {
  auto t0 = Clock::now();
  auto [bo_small, oi_small] = sync_bytes(2, 8, 71);   // mB = 16
  auto [bo_large, oi_large] = sync_bytes(8, 8, 71);   // mB = 64
  double bois_change = std::fabs(double(bo_large) / double(bo_small) - 1.0);
  double ois_growth = double(oi_large) / double(oi_small);

  // End-to-end totals at n = 10^4, m = 10, B = 16, D = 4.
  auto sp = gen_synthetic(10000, 10000, 5, 5, 0.6, 72);
  TrainConfig cfg;
  cfg.B = 16;
  cfg.D = 4;
  cfg.T = 1;
  TrainedPair base, otsa;
  train_both(base, sp, cfg, Protocol::Base, 72, nullptr);
  train_both(otsa, sp, cfg, Protocol::Otsa, 72, nullptr);
  const u64 bb = total_bytes(base.run), ob = total_bytes(otsa.run);
  bool ok = bois_change <= 0.05 && ois_growth >= 3.0 && ob < bb;
  return {ok, fmt("BOIS level bytes %llu -> %llu as mB 16 -> 64 (change %.2f%% <= 5%%); base OIS bytes %llu -> %llu "
                  "(x%.2f >= 3); n=10^4 m=10 B=16 D=4 totals: otsa %.1f MB < base %.1f MB; %.0fs",
                  (unsigned long long)bo_small, (unsigned long long)bo_large, 100 * bois_change,
                  (unsigned long long)oi_small, (unsigned long long)oi_large, ois_growth, ob / 1e6, bb / 1e6,
                  seconds_since(t0))};
}

// ---- 8: F1 on the bundled dataset ----

Outcome f1_sanity(const std::string& dir) {
  Dataset d0, d1;
  try {
    d0 = load_csv(dir + "/bcw_party0.csv");
    d1 = load_csv(dir + "/bcw_party1.csv");
  } catch (const std::exception& e) {
    return {false, std::string("cannot load bundled data: ") + e.what()};
  }
  TrainConfig cfg;
  cfg.T = 3;
  cfg.D = 3;
  cfg.B = 8;
  auto folds = kfold(d0.n(), 5, 81);
  std::unordered_map<u64, std::size_t> at1;
  for (std::size_t i = 0; i < d1.n(); ++i) at1[d1.ids[i]] = i;
  std::vector<double> ps, pp;
  std::vector<int> ys, yp;
  auto t0 = Clock::now();
  for (int f = 0; f < 5; ++f) {
    std::vector<std::size_t> tr0, te0, tr1, te1;
    std::set<std::size_t> test(folds[f].begin(), folds[f].end());
    for (std::size_t i = 0; i < d0.n(); ++i) (test.count(i) ? te0 : tr0).push_back(i);
    std::set<u64> test_ids;
    for (std::size_t i : te0) test_ids.insert(d0.ids[i]);
    for (std::size_t i = 0; i < d1.n(); ++i) (test_ids.count(d1.ids[i]) ? te1 : tr1).push_back(i);
    SyntheticPair train_sp, test_sp;
    train_sp.d0 = d0.rows(tr0);
    train_sp.d1 = d1.rows(tr1);
    test_sp.d0 = d0.rows(te0);
    test_sp.d1 = d1.rows(te1);

    TrainedPair t;
    train_both(t, train_sp, cfg, Protocol::Otsa, 800 + f, nullptr);
    HashingParams hp;
    hp.seed = 900 + f;
    std::vector<double> p[2];
    run_pair([&](Party& P) { p[P.id] = infer(P, P.id ? test_sp.d1 : test_sp.d0, t.model[P.id], hp); }, 3, 4);
    ps.insert(ps.end(), p[0].begin(), p[0].end());
    ys.insert(ys.end(), test_sp.d0.y.begin(), test_sp.d0.y.end());

    Binning b0 = fit_bins(train_sp.d0, cfg.B), b1 = fit_bins(train_sp.d1, cfg.B);
    PlainModel ref = train_plain(join_common(train_sp.d0, train_sp.d1, b0, b1), cfg);
    JointData Jt = join_common(test_sp.d0, test_sp.d1, b0, b1);
    auto q = predict_plain(ref, Jt);
    pp.insert(pp.end(), q.begin(), q.end());
    yp.insert(yp.end(), Jt.y.begin(), Jt.y.end());
  }
  double fs = f1_score(ps, ys), fp = f1_score(pp, yp);
  return {std::fabs(fs - fp) <= 0.03,
          fmt("5-fold F1 on %zu rows: secure %.4f, plaintext %.4f (|diff| %.4f <= 0.03); %.0fs", d0.n(), fs, fp,
              std::fabs(fs - fp), seconds_since(t0))};
}

// ---- 9: determinism ----

Outcome determinism() {
  auto sp = gen_synthetic(400, 350, 3, 3, 0.6, 91);
  TrainConfig cfg;
  cfg.T = 2;
  cfg.D = 3;
  TrainedPair a, b;
  train_both(a, sp, cfg, Protocol::Otsa, 91, nullptr);
  train_both(b, sp, cfg, Protocol::Otsa, 91, nullptr);
  bool same = true;
  for (int p = 0; p < 2; ++p) {
    same &= a.model[p].hash_hex() == b.model[p].hash_hex();
    same &= a.run.report[p].bytes_by_tag == b.run.report[p].bytes_by_tag;
    same &= a.run.report[p].rounds == b.run.report[p].rounds;
  }
  TrainedPair c;
  train_both(c, sp, cfg, Protocol::Otsa, 92, nullptr);
  bool differs = c.model[0].hash_hex() != a.model[0].hash_hex();
  return {same && differs, fmt("same seed: model hashes %s, traffic counters %s; another seed changes the shares: %s",
                               a.model[0].hash_hex() == b.model[0].hash_hex() ? "identical" : "differ",
                               a.run.report[0].bytes_by_tag == b.run.report[0].bytes_by_tag ? "identical" : "differ",
                               differs ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string data_dir = ANONGBDT_DATA_DIR;
  std::set<int> want;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--data=", 0) == 0)
      data_dir = a.substr(7);
    else
      want.insert(std::stoi(a));
  }
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Item> items = {
      {1, "sigmoid accuracy", sigmoid_accuracy},
      {2, "packing correctness", packing_correctness},
      {3, "packing speed", packing_speed},
      {4, "oracle equivalence", oracle_equivalence},
      {5, "reveal ledger", reveal_ledger},
      {6, "indicator algebra", indicator_algebra},
      {7, "communication scaling", communication_scaling},
      {8, "F1 sanity", [&] { return f1_sanity(data_dir); }},
      {9, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& it : items) {
    if (!want.empty() && !want.count(it.id)) continue;
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d (%s): %s  %s\n", it.id, it.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
