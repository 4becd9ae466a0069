#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <stdexcept>

#include "anongbdt/gbdt.hpp"
#include "anongbdt/sync.hpp"

namespace ag {

namespace {

Shares cat(const Shares& a, const Shares& b) {
  Shares r(a);
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Shares repeat(const Shares& v, std::size_t times) {
  Shares r;
  r.reserve(v.size() * times);
  for (std::size_t t = 0; t < times; ++t) r.insert(r.end(), v.begin(), v.end());
  return r;
}

// Sums of consecutive segments of length `seg`.
Shares seg_sum(const Shares& v, std::size_t seg) {
  Shares r(seg ? v.size() / seg : 0, 0);
  for (std::size_t i = 0; i < v.size(); ++i) r[i / seg] += v[i];
  return r;
}

Shares slice(const Shares& v, std::size_t from, std::size_t len) {
  return Shares(v.begin() + from, v.begin() + from + len);
}

int ceil_log2(std::size_t x) {
  int k = 0;
  while ((std::size_t(1) << k) < x) ++k;
  return k;
}

struct Peer {
  std::size_t m = 0;
  std::size_t n = 0;
};

// Both parties must agree on the hyperparameters and the protocol; feature counts are exchanged.
Peer handshake(Party& P, const Dataset& mine, const TrainConfig& cfg, Protocol proto) {
  Bytes b;
  put_u64(b, u64(cfg.T));
  put_u64(b, u64(cfg.D));
  put_u64(b, u64(cfg.B));
  for (double v : {cfg.alpha, cfg.gamma, cfg.shrinkage}) {
    u64 w;
    std::memcpy(&w, &v, 8);
    put_u64(b, w);
  }
  put_u64(b, u64(proto));
  const std::size_t fixed = b.size();
  put_u64(b, mine.m);
  put_u64(b, mine.n());
  Bytes got = P.exchange(Tag::Setup, b);
  if (got.size() != b.size() || !std::equal(b.begin(), b.begin() + fixed, got.begin()))
    throw ProtocolError("training configuration differs between the parties");
  std::size_t pos = fixed;
  Peer peer;
  peer.m = get_u64(got, pos);
  peer.n = get_u64(got, pos);
  return peer;
}

// Root gradients of every bucket, zero outside the intersection.
std::pair<Shares, Shares> gradients(Party& P, const Shares& yt, const Shares& y, const BitVec& root,
                                    const SigmoidParams& sp) {
  Shares p = sigmoid(P, yt, sp);
  Shares g = sub_shares(p, y);
  Shares om = sub_shares(const_share(P, p.size(), encode_fixed(1.0, P.fp)), p);
  Shares h = mul_fixed(P, p, om);
  return mux2(P, root, g, h);
}

// Scores of every candidate of K nodes. G and H hold K consecutive per-node histograms of mt * B bins.
// With `p1_from` >= 0, candidates at or after that offset come from a different alignment instance
// than the first block; those with an empty side take the value of the first block's trivial
// candidate so that equal-partition ties are resolved the same way as in a single instance.
Shares node_scores(Party& P, const Shares& G, const Shares& H, std::size_t K, std::size_t mt, int B, double alpha,
                   int shift, long p1_from) {
  const std::size_t nb = mt * B, N = K * nb;
  Shares GL(N), HL(N), GR(N), HR(N);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t z = 0; z < mt; ++z) {
      const std::size_t base = k * nb + z * B;
      u64 tg = 0, th = 0;
      for (int u = 0; u < B; ++u) {
        tg += G[base + u];
        th += H[base + u];
        GL[base + u] = tg;
        HL[base + u] = th;
      }
      for (int u = 0; u < B; ++u) {
        GR[base + u] = tg - GL[base + u];
        HR[base + u] = th - HL[base + u];
      }
    }
  Shares x = cat(GL, GR);
  if (shift > 0) x = trunc_exact(P, x, shift);
  Shares sq = mul_fixed(P, x, x);
  Shares den = add_public(cat(HL, HR), encode_fixed(alpha, P.fp), P.id, P.fp);
  Shares q = div(P, sq, den, DivParams{});
  Shares score(N);
  for (std::size_t i = 0; i < N; ++i) score[i] = q[i] + q[N + i];
  if (p1_from < 0 || std::size_t(p1_from) >= nb) return score;

  const std::size_t w = nb - std::size_t(p1_from);
  Shares zin;
  zin.reserve(4 * K * w);
  for (const Shares* s : {&GL, &HL, &GR, &HR})
    for (std::size_t k = 0; k < K; ++k)
      zin.insert(zin.end(), s->begin() + k * nb + p1_from, s->begin() + (k + 1) * nb);
  BitVec z = equal_zero(P, zin);
  const std::size_t Q = K * w;
  BitVec lhs(2 * Q), rhs(2 * Q);
  for (std::size_t i = 0; i < Q; ++i) {
    lhs[i] = z[i];              // G_L == 0
    rhs[i] = z[Q + i];          // H_L == 0
    lhs[Q + i] = z[2 * Q + i];  // G_R == 0
    rhs[Q + i] = z[3 * Q + i];  // H_R == 0
  }
  BitVec e = and_bits(P, lhs, rhs);
  BitVec triv = or_bits(P, BitVec(e.begin(), e.begin() + Q), BitVec(e.begin() + Q, e.end()));
  Shares diff(Q);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < w; ++j)
      diff[k * w + j] = score[k * nb + B - 1] - score[k * nb + p1_from + j];
  Shares add = mux(P, triv, diff);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < w; ++j) score[k * nb + p1_from + j] += add[k * w + j];
  return score;
}

struct Chosen {
  int owner = 0;
  int feature = -1;  // local to the owner, -1 elsewhere
  int bin = -1;
};

// Argmax per node, public owner bit, split index revealed to its owner only.
std::vector<Chosen> choose(Party& P, const Shares& score, std::size_t K, std::size_t m0, std::size_t m1, int B,
                           const std::string& ctx) {
  const std::size_t nb = (m0 + m1) * B;
  Shares idx(K);
  for (std::size_t k = 0; k < K; ++k) idx[k] = argmax(P, slice(score, k * nb, nb))[0];
  BitVec cb = greater_pub(P, idx, std::vector<u64>(K, u64(m0 * B - 1)));
  BitVec owner = open_bits(P, cb, Tag::Gbdt);
  std::vector<i64> ob(owner.begin(), owner.end());
  P.reveal("owner_bit", -1, ob, ctx);

  Shares send;
  for (std::size_t k = 0; k < K; ++k)
    if (owner[k] != P.id) send.push_back(idx[k]);
  Shares recv = from_bytes(P.exchange(Tag::Gbdt, to_bytes(send)));
  std::vector<Chosen> out(K);
  std::size_t r = 0;
  for (std::size_t k = 0; k < K; ++k) {
    out[k].owner = owner[k];
    if (owner[k] != P.id) continue;
    if (r >= recv.size()) throw ProtocolError("split index message too short");
    const u64 g = idx[k] + recv[r++];
    const std::size_t z = std::size_t(g) / B, off = owner[k] ? m0 : 0;
    if (g >= nb || z < off || z - off >= (owner[k] ? m1 : m0)) throw ProtocolError("split index out of range");
    out[k].feature = int(z - off);
    out[k].bin = int(g % B);
    P.reveal("owner_split", P.id, {i64(out[k].feature), i64(out[k].bin)}, ctx);
  }
  return out;
}

// Indicator of bucket j going left: x <= e_u, i.e. bin <= u. Empty buckets are 0.
BitVec assignment(const std::vector<std::vector<int>>& bins, const std::vector<int>& rows, int f, int u) {
  BitVec b(rows.size(), 0);
  for (std::size_t j = 0; j < rows.size(); ++j)
    if (rows[j] >= 0) b[j] = u8(bins[f][rows[j]] <= u);
  return b;
}

BinLayout layout_of(const std::vector<std::vector<int>>& bins, const std::vector<int>& rows, int B,
                    const BitVec* mask) {
  BinLayout L;
  L.features = int(bins.size());
  L.B = B;
  L.bin.assign(bins.size(), std::vector<int>(rows.size(), -1));
  for (std::size_t f = 0; f < bins.size(); ++f)
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (rows[j] >= 0 && (!mask || (*mask)[j])) L.bin[f][j] = bins[f][rows[j]];
  return L;
}

// Leaf weights from the leaf indicators of one instance, then the tree's contribution per bucket.
Shares leaf_weights(Party& P, const std::vector<BitVec>& leaf_ind, const Shares& g, const Shares& h,
                    const TrainConfig& cfg) {
  const std::size_t L = leaf_ind.size(), m = g.size();
  BitVec all;
  for (const auto& b : leaf_ind) all.insert(all.end(), b.begin(), b.end());
  auto [gs, hs] = mux2(P, all, repeat(g, L), repeat(h, L));
  Shares G = seg_sum(gs, m), H = seg_sum(hs, m);
  Shares negG = sub_shares(Shares(L, 0), G);
  DivParams dp;
  dp.guard = 8;  // leaf weights are small, so trade range for precision
  Shares w = div(P, negG, add_public(H, encode_fixed(cfg.alpha, P.fp), P.id, P.fp), dp);
  if (cfg.shrinkage != 1.0) w = mul_const_fixed(P, w, cfg.shrinkage);
  return w;
}

Shares tree_output(Party& P, const std::vector<BitVec>& leaf_ind, const Shares& w) {
  const std::size_t L = leaf_ind.size(), m = L ? leaf_ind[0].size() : 0;
  BitVec all;
  Shares ws;
  for (std::size_t l = 0; l < L; ++l) {
    all.insert(all.end(), leaf_ind[l].begin(), leaf_ind[l].end());
    ws.insert(ws.end(), m, w[l]);
  }
  Shares sel = mux(P, all, ws);
  Shares out(m, 0);
  for (std::size_t i = 0; i < sel.size(); ++i) out[i % m] += sel[i];
  return out;
}

std::string where(int t, int d) { return "tree " + std::to_string(t) + " level " + std::to_string(d); }

void fill_split(NodeSplit& s, const Chosen& c, const Binning& bins) {
  s.owner = c.owner;
  if (c.feature >= 0) {
    s.feature = c.feature;
    s.bin = c.bin;
    s.threshold = bins.threshold(std::size_t(c.feature), c.bin);
  }
}

struct Setup {
  Binning binning;
  std::vector<std::vector<int>> bins;  // [feature][row] of this party
  Peer peer;
  std::size_t m0 = 0, m1 = 0;
  std::vector<u64> yenc;
};

Setup prepare(Party& P, const Dataset& mine, const TrainConfig& cfg, const TrainOptions& opt) {
  cfg.validate();
  mine.validate();
  if (!opt.he) throw std::invalid_argument("train: an HE context is required");
  if (P.id == 0 && !mine.labeled()) throw std::invalid_argument("train: party 0 must hold the labels");
  if (mine.m == 0) throw std::invalid_argument("train: every party needs at least one feature");
  Setup s;
  s.peer = handshake(P, mine, cfg, opt.protocol);
  if (s.peer.m == 0) throw ProtocolError("the other party has no features");
  s.m0 = P.id == 0 ? mine.m : s.peer.m;
  s.m1 = P.id == 0 ? s.peer.m : mine.m;
  s.binning = fit_bins(mine, cfg.B);
  s.bins = bin_columns(mine, s.binning);
  if (P.id == 0)
    for (int v : mine.y) s.yenc.push_back(encode_fixed(double(v), P.fp));
  return s;
}

PartyModel empty_model(Party& P, const Dataset& mine, const TrainConfig& cfg, const Setup& s) {
  PartyModel M;
  M.party = P.id;
  M.cfg = cfg;
  M.m_local = mine.m;
  M.m_peer = s.peer.m;
  return M;
}

// ---- histogram-sharing base design ----

PartyModel train_base(Party& P, const Dataset& mine, const TrainConfig& cfg, const TrainOptions& opt) {
  Setup s = prepare(P, mine, cfg, opt);
  const int B = cfg.B, D = cfg.D;
  BitMatrix M, Mt;
  if (P.id == 1) std::tie(M, Mt) = bin_matrices(s.bins, B);
  BasePsiResult R = base_circuit_psi(P, PsiInput{mine.ids, P.id == 0 ? &s.yenc : nullptr},
                                     P.id == 1 ? &M : nullptr, P.id == 1 ? &Mt : nullptr, opt.hp);
  const Alignment& A = R.inst;
  const std::size_t m = A.m, m0 = s.m0, m1 = s.m1;
  const int shift = std::max(0, ceil_log2(m) - 10);
  HeSession S = he_setup(P, *opt.he);
  const int log_scale = opt.he->params().log_delta() - bmv_tau(int(m0), B);
  BinLayout lay0;
  if (P.id == 0) lay0 = layout_of(s.bins, A.ch.row, B, nullptr);

  PartyModel model = empty_model(P, mine, cfg, s);
  Shares yt(m, 0);
  const std::size_t internal = std::size_t(1) << (D - 1);
  for (int t = 0; t < cfg.T; ++t) {
    auto [g1, h1] = gradients(P, yt, A.y, A.b, opt.sigmoid);
    std::vector<BitVec> ind(2 * internal);
    ind[1] = A.b;
    std::vector<Shares> HG(2 * internal), HH(2 * internal);
    PartyTree tree;
    tree.nodes.resize(internal);
    for (int d = 1; d < D; ++d) {
      const std::size_t first = std::size_t(1) << (d - 1), K = first;
      for (std::size_t k = first; k < 2 * first; ++k) {
        if (k != 1 && k % 2 == 1) {
          HG[k] = sub_shares(HG[k / 2], HG[k - 1]);
          HH[k] = sub_shares(HH[k / 2], HH[k - 1]);
          continue;
        }
        Shares g = g1, h = h1;
        if (k != 1) std::tie(g, h) = mux2(P, ind[k], g1, h1);
        auto cts = a2h_gh(P, S, 0, g, h, log_scale);
        Shares gh0 = bin_mat_vec(P, S, 0, P.id == 0 ? &cts : nullptr, P.id == 0 ? &lay0 : nullptr, int(m0), B);
        const std::size_t rows = m1 * B;
        auto [gs, hs] = mux2(P, R.M1.bits, repeat(g, rows), repeat(h, rows));
        HG[k] = cat(slice(gh0, 0, m0 * B), seg_sum(gs, m));
        HH[k] = cat(slice(gh0, m0 * B, m0 * B), seg_sum(hs, m));
      }
      Shares G, H;
      for (std::size_t k = first; k < 2 * first; ++k) {
        G.insert(G.end(), HG[k].begin(), HG[k].end());
        H.insert(H.end(), HH[k].begin(), HH[k].end());
      }
      Shares score = node_scores(P, G, H, K, m0 + m1, B, cfg.alpha, shift, -1);
      auto chosen = choose(P, score, K, m0, m1, B, where(t, d));
      for (std::size_t k = first; k < 2 * first; ++k) {
        const Chosen& c = chosen[k - first];
        fill_split(tree.nodes[k], c, s.binning);
        BitVec bstar;
        if (c.owner == 0 && P.id == 0) bstar = assignment(s.bins, A.ch.row, c.feature, c.bin);
        const int row = c.owner == 1 && P.id == 1 ? c.feature * B + c.bin : -1;
        Children ch = ois(P, c.owner, ind[k], R.Mt1, c.owner == 0 && P.id == 0 ? &bstar : nullptr, row);
        ind[2 * k] = std::move(ch.left);
        ind[2 * k + 1] = std::move(ch.right);
      }
    }
    std::vector<BitVec> leaves(ind.begin() + internal, ind.end());
    tree.leaf = leaf_weights(P, leaves, g1, h1, cfg);
    yt = add_shares(yt, tree_output(P, leaves, tree.leaf));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// ---- dual-instance design with batched synchronization ----

// Encrypted gradients reusable by a node: pool entry and, at the holder, the buckets still in the node.
struct Source {
  int ct = -1;
  BitVec mask;
};

PartyModel train_otsa(Party& P, const Dataset& mine, const TrainConfig& cfg, const TrainOptions& opt) {
  Setup s = prepare(P, mine, cfg, opt);
  const int B = cfg.B, D = cfg.D;
  auto A = dual_circuit_psi(P, PsiInput{mine.ids, P.id == 0 ? &s.yenc : nullptr}, opt.hp);
  const std::size_t m0 = s.m0, m1 = s.m1, mf[2] = {m0, m1};
  const int shift = std::max(0, ceil_log2(std::max(A[0].m, A[1].m)) - 10);
  HeSession S = he_setup(P, *opt.he);
  const int log_delta = opt.he->params().log_delta();

  PartyModel model = empty_model(P, mine, cfg, s);
  Shares yt[2] = {Shares(A[0].m, 0), Shares(A[1].m, 0)};
  const std::size_t internal = std::size_t(1) << (D - 1);
  const std::vector<int>& my_rows = A[P.id].ch.row;

  for (int t = 0; t < cfg.T; ++t) {
    Shares g1[2], h1[2];
    for (int i = 0; i < 2; ++i) std::tie(g1[i], h1[i]) = gradients(P, yt[i], A[i].y, A[i].b, opt.sigmoid);
    std::vector<BitVec> ind[2];
    std::vector<std::vector<Rlwe>> pool;
    std::vector<std::optional<Source>> src[2];
    for (int i = 0; i < 2; ++i) {
      ind[i].resize(2 * internal);
      ind[i][1] = A[i].b;
      src[i].resize(2 * internal);
    }
    std::vector<Shares> HG(2 * internal), HH(2 * internal);
    PartyTree tree;
    tree.nodes.resize(internal);

    for (int d = 1; d < D; ++d) {
      const std::size_t first = std::size_t(1) << (d - 1), K = first;
      for (std::size_t k = first; k < 2 * first; ++k) {
        if (k != 1 && k % 2 == 1) {
          HG[k] = sub_shares(HG[k / 2], HG[k - 1]);
          HH[k] = sub_shares(HH[k / 2], HH[k - 1]);
          continue;
        }
        Shares part[2];
        for (int c = 0; c < 2; ++c) {
          const int tau = bmv_tau(int(mf[c]), B);
          if (!src[c][k]) {
            Shares g = g1[c], h = h1[c];
            if (k != 1) std::tie(g, h) = mux2(P, ind[c][k], g1[c], h1[c]);
            pool.push_back(a2h_gh(P, S, c, g, h, log_delta - tau));
            Source fresh;
            fresh.ct = int(pool.size() - 1);
            if (P.id == c) fresh.mask.assign(A[c].m, 1);
            src[c][k] = fresh;
          }
          const Source& sc = *src[c][k];
          if (P.id == c) {
            BinLayout lay = layout_of(s.bins, my_rows, B, &sc.mask);
            part[c] = bin_mat_vec(P, S, c, &pool[sc.ct], &lay, int(mf[c]), B);
          } else {
            part[c] = bin_mat_vec(P, S, c, nullptr, nullptr, int(mf[c]), B);
          }
        }
        HG[k] = cat(slice(part[0], 0, m0 * B), slice(part[1], 0, m1 * B));
        HH[k] = cat(slice(part[0], m0 * B, m0 * B), slice(part[1], m1 * B, m1 * B));
      }
      Shares G, H;
      for (std::size_t k = first; k < 2 * first; ++k) {
        G.insert(G.end(), HG[k].begin(), HG[k].end());
        H.insert(H.end(), HH[k].begin(), HH[k].end());
      }
      Shares score = node_scores(P, G, H, K, m0 + m1, B, cfg.alpha, shift, long(m0 * B));
      auto chosen = choose(P, score, K, m0, m1, B, where(t, d));

      for (int c = 0; c < 2; ++c) {
        std::vector<NodeSync> batch;
        std::vector<std::size_t> which;
        for (std::size_t k = first; k < 2 * first; ++k) {
          const Chosen& ch = chosen[k - first];
          if (ch.owner != c) continue;
          NodeSync nd;
          nd.pos = int(k - first);
          nd.parent[0] = ind[0][k];
          nd.parent[1] = ind[1][k];
          if (P.id == c) nd.bstar = assignment(s.bins, my_rows, ch.feature, ch.bin);
          batch.push_back(std::move(nd));
          which.push_back(k);
        }
        if (batch.empty()) continue;
        auto kids = bois(P, c, A, batch);
        for (std::size_t q = 0; q < which.size(); ++q) {
          const std::size_t k = which[q];
          for (int i = 0; i < 2; ++i) {
            ind[i][2 * k] = std::move(kids[q].inst[i].left);
            ind[i][2 * k + 1] = std::move(kids[q].inst[i].right);
          }
          if (opt.owner_skip && src[c][k] && 2 * k < internal) {
            Source l = *src[c][k], r = *src[c][k];
            if (P.id == c) {
              const BitVec& bs = batch[q].bstar;
              for (std::size_t j = 0; j < bs.size(); ++j) {
                l.mask[j] &= bs[j];
                r.mask[j] &= u8(bs[j] ^ 1);
              }
            }
            src[c][2 * k] = std::move(l);
            src[c][2 * k + 1] = std::move(r);
          }
        }
      }
      for (std::size_t k = first; k < 2 * first; ++k) fill_split(tree.nodes[k], chosen[k - first], s.binning);
    }
    std::vector<BitVec> leaves[2];
    for (int i = 0; i < 2; ++i) leaves[i].assign(ind[i].begin() + internal, ind[i].end());
    tree.leaf = leaf_weights(P, leaves[0], g1[0], h1[0], cfg);
    for (int i = 0; i < 2; ++i) yt[i] = add_shares(yt[i], tree_output(P, leaves[i], tree.leaf));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// Leaves reachable by a row given only this party's splits (non-owned nodes pass to both children).
u64 reachable(const PartyTree& t, int me, const Dataset& d, std::size_t row, int D) {
  const std::size_t internal = std::size_t(1) << (D - 1);
  u64 out = 0;
  std::vector<std::size_t> stack{1};
  while (!stack.empty()) {
    std::size_t k = stack.back();
    stack.pop_back();
    if (k >= internal) {
      out |= u64(1) << (k - internal);
      continue;
    }
    const NodeSplit& s = t.nodes[k];
    if (s.owner == me) {
      stack.push_back(d.x(row, std::size_t(s.feature)) <= s.threshold ? 2 * k : 2 * k + 1);
    } else {
      stack.push_back(2 * k);
      stack.push_back(2 * k + 1);
    }
  }
  return out;
}

}  // namespace

PartyModel train(Party& P, const Dataset& mine, const TrainConfig& cfg, const TrainOptions& opt) {
  return opt.protocol == Protocol::Base ? train_base(P, mine, cfg, opt) : train_otsa(P, mine, cfg, opt);
}

std::vector<double> infer(Party& P, const Dataset& mine, const PartyModel& model, const HashingParams& hp,
                          const SigmoidParams& sp) {
  mine.validate();
  if (model.party != P.id) throw std::invalid_argument("infer: model belongs to the other party");
  if (model.m_local != mine.m) throw std::invalid_argument("infer: feature count differs from the model");
  const int D = model.cfg.D;
  const std::size_t L = std::size_t(1) << (D - 1);
  if (L > 64) throw std::invalid_argument("infer: depth too large");
  Bytes hs;
  put_u64(hs, u64(model.cfg.T));
  put_u64(hs, u64(D));
  put_u64(hs, u64(model.trees.size()));
  if (P.exchange(Tag::Setup, hs) != hs) throw ProtocolError("model shapes differ between the parties");

  Alignment A = circuit_psi(P, 0, PsiInput{mine.ids, nullptr}, hp, 0);
  const std::size_t m = A.m;
  Shares S(m, 0);
  for (const PartyTree& t : model.trees) {
    std::vector<u64> words(mine.n());
    for (std::size_t r = 0; r < mine.n(); ++r) words[r] = reachable(t, P.id, mine, r, D);
    BitVec own;
    if (P.id == 0) {
      own.assign(L * m, 0);
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t j = 0; j < m; ++j)
          if (A.ch.row[j] >= 0) own[l * m + j] = u8(words[A.ch.row[j]] >> l & 1);
    }
    BitVec x0 = share_plain(P, 0, P.id == 0 ? &own : nullptr, L * m, Tag::Infer);
    std::vector<u64> packed = transfer_rows(P, A, P.id == 1 ? &words : nullptr, int(L), Tag::Infer);
    BitVec x1(L * m);
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t j = 0; j < m; ++j) x1[l * m + j] = u8(packed[j] >> l & 1);
    BitVec b = and_bits(P, x0, x1);
    std::vector<BitVec> leaves(L);
    for (std::size_t l = 0; l < L; ++l) leaves[l].assign(b.begin() + l * m, b.begin() + (l + 1) * m);
    S = add_shares(S, tree_output(P, leaves, t.leaf));
  }
  Shares yt = mux(P, A.b, S);
  if (P.id == 1) {
    P.send(Tag::Infer, to_bytes(yt));
    return {};
  }
  Shares other = from_bytes(P.recv(Tag::Infer));
  if (other.size() != m) throw ProtocolError("inference output has the wrong length");
  std::vector<i64> vals(m);
  std::vector<double> p(mine.n(), 0.5);
  for (std::size_t j = 0; j < m; ++j) {
    const u64 v = yt[j] + other[j];
    vals[j] = to_signed(v);
    if (A.ch.row[j] >= 0) p[A.ch.row[j]] = sigmoid_approx(decode_fixed(v, P.fp), sp);
  }
  P.reveal("inference_output", 0, std::move(vals), "scores");
  return p;
}

}  // namespace ag
