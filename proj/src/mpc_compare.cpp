#include <stdexcept>

#include "anongbdt/mpc.hpp"

namespace ag {

namespace {

struct Leaf {
  BitVec gt, eq;
};

// Merges per-block (gt, eq) shares, least significant block first, into the
// comparison result of the whole word. All instances share the tree shape.
BitVec combine(Party& P, std::vector<Leaf> leaves) {
  if (leaves.empty()) throw std::invalid_argument("combine: no blocks");
  while (leaves.size() > 1) {
    const std::size_t pairs = leaves.size() / 2;
    const bool last = leaves.size() == 2;
    const std::size_t n = leaves[0].gt.size();
    BitVec A, B;
    A.reserve(2 * pairs * n);
    B.reserve(2 * pairs * n);
    for (std::size_t p = 0; p < pairs; ++p) {
      const Leaf& lo = leaves[2 * p];
      const Leaf& hi = leaves[2 * p + 1];
      A.insert(A.end(), hi.eq.begin(), hi.eq.end());
      B.insert(B.end(), lo.gt.begin(), lo.gt.end());
    }
    if (!last)
      for (std::size_t p = 0; p < pairs; ++p) {
        A.insert(A.end(), leaves[2 * p + 1].eq.begin(), leaves[2 * p + 1].eq.end());
        B.insert(B.end(), leaves[2 * p].eq.begin(), leaves[2 * p].eq.end());
      }
    BitVec Z = and_bits(P, A, B);
    std::vector<Leaf> next;
    next.reserve(pairs + 1);
    for (std::size_t p = 0; p < pairs; ++p) {
      Leaf m;
      m.gt.resize(n);
      for (std::size_t i = 0; i < n; ++i) m.gt[i] = leaves[2 * p + 1].gt[i] ^ Z[p * n + i];
      if (!last) m.eq.assign(Z.begin() + (pairs + p) * n, Z.begin() + (pairs + p + 1) * n);
      next.push_back(std::move(m));
    }
    if (leaves.size() % 2) next.push_back(std::move(leaves.back()));
    leaves = std::move(next);
  }
  return leaves[0].gt;
}

BitVec and_tree(Party& P, std::vector<BitVec> parts) {
  while (parts.size() > 1) {
    const std::size_t pairs = parts.size() / 2;
    const std::size_t n = parts[0].size();
    BitVec A, B;
    for (std::size_t p = 0; p < pairs; ++p) {
      A.insert(A.end(), parts[2 * p].begin(), parts[2 * p].end());
      B.insert(B.end(), parts[2 * p + 1].begin(), parts[2 * p + 1].end());
    }
    BitVec Z = and_bits(P, A, B);
    std::vector<BitVec> next;
    for (std::size_t p = 0; p < pairs; ++p) next.emplace_back(Z.begin() + p * n, Z.begin() + (p + 1) * n);
    if (parts.size() % 2) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return parts[0];
}

inline u32 block_of(u64 v, int blk) { return u32((v >> (4 * blk)) & 15); }

// OT stage of a comparison: party 0 (sender) masks (gt, eq) for each of the 16
// possible values of party 1's block. Returns leaves for blocks [first, last).
std::vector<Leaf> compare_blocks(Party& P, const std::vector<u64>& mine, int first, int last) {
  const std::size_t n = mine.size();
  const int nb = last - first;
  std::vector<Leaf> leaves(nb);
  for (auto& l : leaves) {
    l.gt.resize(n);
    l.eq.resize(n);
  }
  if (P.id == 0) {
    std::vector<u128> msgs(n * nb * 16);
    for (int b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < n; ++i) {
        u8 rg = P.rng.bit(), re = P.rng.bit();
        leaves[b].gt[i] = rg;
        leaves[b].eq[i] = re;
        u32 a = block_of(mine[i], first + b);
        u128* m = &msgs[(std::size_t(b) * n + i) * 16];
        for (u32 j = 0; j < 16; ++j) m[j] = u128(((a > j) ^ rg) | (((a == j) ^ re) << 1));
      }
    ot_send(P, 16, 2, msgs, Tag::Greater);
  } else {
    std::vector<u32> ch(n * nb);
    for (int b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < n; ++i) ch[std::size_t(b) * n + i] = block_of(mine[i], first + b);
    auto got = ot_recv(P, 16, 2, ch, Tag::Greater);
    for (int b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < n; ++i) {
        u32 v = u32(got[std::size_t(b) * n + i]);
        leaves[b].gt[i] = v & 1;
        leaves[b].eq[i] = (v >> 1) & 1;
      }
  }
  return leaves;
}

// msb of a shared value d: msb(d0) ^ msb(d1) ^ carry(low 63 bits).
BitVec msb_shared(Party& P, const Shares& d) {
  const u64 low63 = mask_bits(63);
  std::vector<u64> in(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) in[i] = P.id == 0 ? (d[i] & low63) : (low63 - (d[i] & low63));
  BitVec c = millionaire(P, in, 63);
  for (std::size_t i = 0; i < d.size(); ++i) c[i] ^= u8(d[i] >> 63);
  return c;
}

}  // namespace

BitVec millionaire(Party& P, const std::vector<u64>& mine, int nbits) {
  if (nbits < 1 || nbits > 64) throw std::invalid_argument("millionaire: bad width");
  if (mine.empty()) return {};
  const int nb = (nbits + 3) / 4;
  std::vector<u64> v(mine);
  if (nbits < 64)
    for (auto& x : v) x &= mask_bits(nbits);
  return combine(P, compare_blocks(P, v, 0, nb));
}

BitVec equal_private(Party& P, const std::vector<u64>& mine, int nbits) {
  if (nbits < 1 || nbits > 64) throw std::invalid_argument("equal_private: bad width");
  const std::size_t n = mine.size();
  if (n == 0) return {};
  const int nb = (nbits + 3) / 4;
  const u64 m = mask_bits(nbits);
  std::vector<BitVec> parts(nb, BitVec(n));
  if (P.id == 0) {
    std::vector<u128> msgs(n * nb * 16);
    for (int b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < n; ++i) {
        u8 r = P.rng.bit();
        parts[b][i] = r;
        u32 a = block_of(mine[i] & m, b);
        for (u32 j = 0; j < 16; ++j) msgs[(std::size_t(b) * n + i) * 16 + j] = u128((a == j) ^ r);
      }
    ot_send(P, 16, 1, msgs, Tag::Equal);
  } else {
    std::vector<u32> ch(n * nb);
    for (int b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < n; ++i) ch[std::size_t(b) * n + i] = block_of(mine[i] & m, b);
    auto got = ot_recv(P, 16, 1, ch, Tag::Equal);
    for (int b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < n; ++i) parts[b][i] = u8(got[std::size_t(b) * n + i] & 1);
  }
  P.ctr.equal += n;
  return and_tree(P, std::move(parts));
}

BitVec greater(Party& P, const Shares& x, const Shares& y) {
  if (x.size() != y.size()) throw std::invalid_argument("greater: length mismatch");
  Shares d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = y[i] - x[i];
  P.ctr.greater += x.size();
  return msb_shared(P, d);
}

BitVec greater_pub(Party& P, const Shares& x, const std::vector<u64>& t) {
  if (x.size() != t.size()) throw std::invalid_argument("greater_pub: length mismatch");
  Shares d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = (P.id == 0 ? t[i] : 0) - x[i];
  P.ctr.greater += x.size();
  return msb_shared(P, d);
}

BitVec equal(Party& P, const Shares& x, const Shares& y) {
  if (x.size() != y.size()) throw std::invalid_argument("equal: length mismatch");
  std::vector<u64> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    u64 d = x[i] - y[i];
    v[i] = P.id == 0 ? d : (0 - d);
  }
  return equal_private(P, v, 64);
}

BitVec equal_zero(Party& P, const Shares& x) { return equal(P, x, Shares(x.size(), 0)); }

BitVec greater_pub_shared_low(Party& P, const Shares& x, const std::vector<u64>& thr, int shared_bits) {
  const std::size_t n = x.size(), K = thr.size();
  if (K == 0 || n == 0) return {};
  const int low_blocks = std::max(0, std::min(shared_bits, 60) / 4);
  const u64 lowmask = mask_bits(4 * low_blocks);
  for (u64 t : thr)
    if (low_blocks && ((t ^ thr[0]) & lowmask)) throw std::invalid_argument("thresholds differ in shared low bits");
  const u64 low63 = mask_bits(63);
  const int nb = 16;  // 63-bit comparison in 4-bit blocks
  // Per-threshold inputs. Party 1's input is the same for every threshold.
  std::vector<std::vector<u64>> in(K, std::vector<u64>(n));
  std::vector<u64> msb0(K * n);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      u64 d = (P.id == 0 ? thr[k] : 0) - x[i];
      in[k][i] = P.id == 0 ? (d & low63) : (low63 - (d & low63));
      msb0[k * n + i] = d >> 63;
    }
  // Low blocks: one OT per block for all thresholds.
  std::vector<Leaf> high;
  Leaf low;
  if (low_blocks) {
    auto lows = compare_blocks(P, in[0], 0, low_blocks);
    if (lows.size() == 1) {
      low = lows[0];
    } else {
      // combine() drops eq at the top; keep it by folding pairwise manually.
      std::vector<Leaf> cur = std::move(lows);
      while (cur.size() > 1) {
        const std::size_t pairs = cur.size() / 2;
        BitVec A, B;
        for (std::size_t p = 0; p < pairs; ++p) {
          A.insert(A.end(), cur[2 * p + 1].eq.begin(), cur[2 * p + 1].eq.end());
          B.insert(B.end(), cur[2 * p].gt.begin(), cur[2 * p].gt.end());
        }
        for (std::size_t p = 0; p < pairs; ++p) {
          A.insert(A.end(), cur[2 * p + 1].eq.begin(), cur[2 * p + 1].eq.end());
          B.insert(B.end(), cur[2 * p].eq.begin(), cur[2 * p].eq.end());
        }
        BitVec Z = and_bits(P, A, B);
        std::vector<Leaf> next;
        for (std::size_t p = 0; p < pairs; ++p) {
          Leaf m;
          m.gt.resize(n);
          for (std::size_t i = 0; i < n; ++i) m.gt[i] = cur[2 * p + 1].gt[i] ^ Z[p * n + i];
          m.eq.assign(Z.begin() + (pairs + p) * n, Z.begin() + (pairs + p + 1) * n);
          next.push_back(std::move(m));
        }
        if (cur.size() % 2) next.push_back(std::move(cur.back()));
        cur = std::move(next);
      }
      low = std::move(cur[0]);
    }
  }
  // High blocks: one OT per block whose message carries (gt, eq) for every threshold.
  const int hb = nb - low_blocks;
  std::vector<std::vector<Leaf>> per_k(K, std::vector<Leaf>(hb));
  for (auto& v : per_k)
    for (auto& l : v) {
      l.gt.resize(n);
      l.eq.resize(n);
    }
  const int width = int(2 * K);
  if (width > 128) throw std::invalid_argument("too many thresholds");
  if (P.id == 0) {
    std::vector<u128> msgs(n * hb * 16);
    for (int b = 0; b < hb; ++b)
      for (std::size_t i = 0; i < n; ++i) {
        u128* m = &msgs[(std::size_t(b) * n + i) * 16];
        for (u32 j = 0; j < 16; ++j) m[j] = 0;
        for (std::size_t k = 0; k < K; ++k) {
          u8 rg = P.rng.bit(), re = P.rng.bit();
          per_k[k][b].gt[i] = rg;
          per_k[k][b].eq[i] = re;
          u32 a = block_of(in[k][i], low_blocks + b);
          for (u32 j = 0; j < 16; ++j) m[j] |= u128(((a > j) ^ rg) | (((a == j) ^ re) << 1)) << (2 * k);
        }
      }
    ot_send(P, 16, width, msgs, Tag::Greater);
  } else {
    std::vector<u32> ch(n * hb);
    for (int b = 0; b < hb; ++b)
      for (std::size_t i = 0; i < n; ++i) ch[std::size_t(b) * n + i] = block_of(in[0][i], low_blocks + b);
    auto got = ot_recv(P, 16, width, ch, Tag::Greater);
    for (int b = 0; b < hb; ++b)
      for (std::size_t i = 0; i < n; ++i) {
        u128 v = got[std::size_t(b) * n + i];
        for (std::size_t k = 0; k < K; ++k) {
          per_k[k][b].gt[i] = u8((v >> (2 * k)) & 1);
          per_k[k][b].eq[i] = u8((v >> (2 * k + 1)) & 1);
        }
      }
  }
  // Concatenate thresholds into one batch of K*n instances.
  std::vector<Leaf> leaves;
  if (low_blocks) {
    Leaf l;
    for (std::size_t k = 0; k < K; ++k) {
      l.gt.insert(l.gt.end(), low.gt.begin(), low.gt.end());
      l.eq.insert(l.eq.end(), low.eq.begin(), low.eq.end());
    }
    leaves.push_back(std::move(l));
  }
  for (int b = 0; b < hb; ++b) {
    Leaf l;
    for (std::size_t k = 0; k < K; ++k) {
      l.gt.insert(l.gt.end(), per_k[k][b].gt.begin(), per_k[k][b].gt.end());
      l.eq.insert(l.eq.end(), per_k[k][b].eq.begin(), per_k[k][b].eq.end());
    }
    leaves.push_back(std::move(l));
  }
  BitVec carry = combine(P, std::move(leaves));
  for (std::size_t j = 0; j < K * n; ++j) carry[j] ^= u8(msb0[j]);
  P.ctr.greater += K * n;
  return carry;
}

Shares argmax(Party& P, const Shares& v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty input");
  Shares val = v;
  Shares idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = P.id == 0 ? i : 0;
  while (val.size() > 1) {
    const std::size_t pairs = val.size() / 2;
    const bool last = val.size() == 2;
    Shares l(pairs), r(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      l[p] = val[2 * p];
      r[p] = val[2 * p + 1];
    }
    BitVec c = greater(P, r, l);  // strict: ties keep the left (lower) index
    Shares dv(pairs), di(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      dv[p] = val[2 * p + 1] - val[2 * p];
      di[p] = idx[2 * p + 1] - idx[2 * p];
    }
    Shares nv(pairs), ni(pairs);
    if (last) {
      Shares si = mux(P, c, di);
      for (std::size_t p = 0; p < pairs; ++p) ni[p] = idx[2 * p] + si[p];
    } else {
      auto [sv, si] = mux2(P, c, dv, di);
      for (std::size_t p = 0; p < pairs; ++p) {
        nv[p] = val[2 * p] + sv[p];
        ni[p] = idx[2 * p] + si[p];
      }
    }
    if (val.size() % 2) {
      nv.push_back(val.back());
      ni.push_back(idx.back());
    }
    val = std::move(nv);
    idx = std::move(ni);
  }
  return idx;
}

}  // namespace ag
