#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "anongbdt/psi.hpp"

namespace ag {

namespace {

constexpr u64 kP = (u64(1) << 61) - 1;
constexpr int kChunk = 60;

u64 addp(u64 a, u64 b) {
  u64 s = a + b;
  return s >= kP ? s - kP : s;
}
u64 subp(u64 a, u64 b) { return a >= b ? a - b : a + kP - b; }
u64 mulp(u64 a, u64 b) {
  u128 z = u128(a) * b;
  u64 lo = u64(z & kP), hi = u64(z >> 61);
  return addp(lo, hi);
}
u64 powp(u64 a, u64 e) {
  u64 r = 1;
  while (e) {
    if (e & 1) r = mulp(r, a);
    a = mulp(a, a);
    e >>= 1;
  }
  return r;
}
u64 invp(u64 a) { return powp(a, kP - 2); }
u64 redp(u64 a) { return addp(a & kP, a >> 61); }

struct Hasher {
  Key k;
  std::size_t m;
  Hasher(const HashingParams& hp, std::size_t m_) : k(derive_key(hp.seed, "bucket-hash")), m(m_) {}
  std::size_t operator()(u64 item, int which) const { return std::size_t(hash128(k, {u64(which), item}) % m); }
};

void check_ids(const std::vector<u64>& ids) {
  std::unordered_set<u64> seen;
  seen.reserve(ids.size() * 2);
  for (u64 x : ids) {
    if (x == kPadItem || x == kEmptyQuery) throw std::invalid_argument("identifier collides with a reserved value");
    if (!seen.insert(x).second) throw std::invalid_argument("duplicate identifier");
  }
}

const Key& expand_key() {
  static const Key k = derive_key(0, "opprf-expand");
  return k;
}

// Field-element masks for `chunks` chunks derived from one OPRF output.
void masks_from(u64 s, int chunks, u64* out) {
  u64 buf[8];
  for (int c0 = 0; c0 < chunks; c0 += 8) {
    u64 w[2] = {s, u64(c0)};
    keyed_hash(expand_key(), w, 2, reinterpret_cast<u8*>(buf), sizeof(buf));
    for (int c = c0; c < std::min(chunks, c0 + 8); ++c) out[c] = buf[c - c0] % kP;
  }
}

u64 get_chunk(const u64* words, int nwords, int c) {
  std::size_t bit = std::size_t(c) * kChunk;
  std::size_t w = bit / 64, o = bit % 64;
  u64 v = words[w] >> o;
  if (o > 64 - kChunk && w + 1 < std::size_t(nwords)) v |= words[w + 1] << (64 - o);
  return v & mask_bits(kChunk);
}

void put_chunk(u64* words, int nwords, int c, u64 v) {
  v &= mask_bits(kChunk);
  std::size_t bit = std::size_t(c) * kChunk;
  std::size_t w = bit / 64, o = bit % 64;
  words[w] |= v << o;
  if (o > 64 - kChunk && w + 1 < std::size_t(nwords)) words[w + 1] |= v >> (64 - o);
}

int chunks_for(int width) { return (width + kChunk - 1) / kChunk; }

int ceil_log2(std::size_t x) {
  int r = 0;
  while ((std::size_t(1) << r) < x) ++r;
  return r;
}

}  // namespace

std::size_t table_size(std::size_t n, const HashingParams& hp) {
  if (n == 0) return 0;
  return std::size_t(std::ceil((1.0 + hp.epsilon) * double(n)));
}

std::size_t bucket_of(u64 item, int which, std::size_t m, const HashingParams& hp) {
  return Hasher(hp, m)(item, which);
}

std::size_t CuckooTable::occupied() const {
  return std::size_t(std::count_if(row.begin(), row.end(), [](int r) { return r >= 0; }));
}

CuckooTable build_cuckoo(const std::vector<u64>& ids, std::size_t m, const HashingParams& hp) {
  check_ids(ids);
  CuckooTable t;
  t.m = m;
  t.item.assign(m, kPadItem);
  t.hidx.assign(m, -1);
  t.row.assign(m, -1);
  if (ids.empty()) return t;
  if (m < ids.size()) throw std::invalid_argument("build_cuckoo: table smaller than the set");
  Hasher H(hp, m);
  Prg walk(derive_key(hp.seed, "cuckoo-walk"));
  const std::size_t bound = 500 * std::size_t(std::max(1, ceil_log2(ids.size())));
  for (std::size_t r = 0; r < ids.size(); ++r) {
    u64 x = ids[r];
    int row = int(r), prev = -1;
    for (std::size_t moves = 0;; ++moves) {
      int placed = -1;
      for (int i = 0; i < hp.e; ++i)
        if (t.row[H(x, i)] < 0) {
          placed = i;
          break;
        }
      if (placed >= 0) {
        std::size_t j = H(x, placed);
        t.item[j] = x;
        t.hidx[j] = placed;
        t.row[j] = row;
        break;
      }
      if (moves >= bound) throw HashingFailure("cuckoo insertion exceeded the relocation bound; a stash would be needed");
      int i;
      do {
        i = int(walk.uniform(u64(hp.e)));
      } while (hp.e > 1 && i == prev);
      std::size_t j = H(x, i);
      std::swap(x, t.item[j]);
      std::swap(row, t.row[j]);
      prev = t.hidx[j];
      t.hidx[j] = i;
    }
  }
  return t;
}

std::size_t simple_max_load(std::size_t n, std::size_t m, const HashingParams& hp) {
  if (n == 0 || m == 0) return 1;
  const double N = double(n) * hp.e, p = 1.0 / double(m);
  const double target = -double(hp.kappa) * std::log(2.0) - std::log(double(m));
  auto logpmf = [&](double k) {
    return std::lgamma(N + 1) - std::lgamma(k + 1) - std::lgamma(N - k + 1) + k * std::log(p) +
           (N - k) * std::log1p(-p);
  };
  for (std::size_t L = 1; L < std::size_t(N); ++L) {
    // log of P[X > L], summed from the largest term downwards.
    double first = logpmf(double(L + 1)), acc = 0;
    for (double k = double(L + 1); k <= N; k += 1) {
      double d = logpmf(k) - first;
      acc += std::exp(d);
      if (d < -60) break;
    }
    if (first + std::log(acc) < target) return L;
  }
  return std::size_t(N);
}

SimpleTable build_simple(const std::vector<u64>& ids, std::size_t m, const HashingParams& hp) {
  check_ids(ids);
  SimpleTable t;
  t.m = m;
  t.max_load = simple_max_load(ids.size(), m, hp);
  t.item.assign(m * t.max_load, kPadItem);
  t.hidx.assign(m * t.max_load, -1);
  t.row.assign(m * t.max_load, -1);
  if (ids.empty()) return t;
  Hasher H(hp, m);
  std::vector<std::size_t> load(m, 0);
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (int i = 0; i < hp.e; ++i) {
      std::size_t j = H(ids[r], i);
      if (load[j] == t.max_load) throw HashingFailure("simple-hash bucket exceeded the public load bound");
      std::size_t at = j * t.max_load + load[j]++;
      t.item[at] = ids[r];
      t.hidx[at] = i;
      t.row[at] = int(r);
    }
  return t;
}

u64 opprf_keyword(u64 item, int hidx) {
  static const Key k = derive_key(0, "opprf-keyword");
  return hash64(k, {item, u64(hidx + 1)});
}

void opprf_send(Party& P, const OpprfProgram& prog, Tag tag) {
  const std::size_t m = prog.buckets, L = prog.max_load;
  const int W = prog.words(), C = chunks_for(prog.width);
  if (prog.keys.size() != m * L || prog.vals.size() != m * L * W)
    throw std::invalid_argument("opprf_send: program shape mismatch");
  Key key = P.dealer.oprf_key();
  BitWriter out;
  std::vector<u64> xs(L), ys(L * C), masks(C), full(L + 1), quot(L), coef(C * L);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t real = 0;
    for (std::size_t t = 0; t < L; ++t) {
      u64 kw = prog.keys[j * L + t];
      if (kw == kPadItem) continue;
      u64 x = redp(kw);
      for (std::size_t s = 0; s < real; ++s)
        if (xs[s] == x) throw std::invalid_argument("opprf_send: duplicate programmed keys");
      xs[real] = x;
      masks_from(Dealer::oprf(key, j, kw), C, masks.data());
      const u64* v = &prog.vals[(j * L + t) * W];
      for (int c = 0; c < C; ++c) ys[real * C + c] = subp(get_chunk(v, W, c), masks[c]);
      ++real;
    }
    // Random padding points hide the bucket load.
    for (std::size_t t = real; t < L; ++t) {
      u64 x;
      bool clash;
      do {
        x = P.rng.next() % kP;
        clash = false;
        for (std::size_t s = 0; s < t; ++s) clash |= xs[s] == x;
      } while (clash);
      xs[t] = x;
      for (int c = 0; c < C; ++c) ys[t * C + c] = P.rng.next() % kP;
    }
    // Lagrange interpolation through the L points: full = prod (X - x_s).
    std::fill(full.begin(), full.end(), 0);
    full[0] = 1;
    for (std::size_t s = 0; s < L; ++s) {
      for (std::size_t d = s + 1; d > 0; --d) full[d] = subp(full[d - 1], mulp(full[d], xs[s]));
      full[0] = subp(0, mulp(full[0], xs[s]));
    }
    std::fill(coef.begin(), coef.end(), 0);
    for (std::size_t t = 0; t < L; ++t) {
      // quot = full / (X - x_t), by synthetic division from the top.
      u64 carry = full[L];
      for (std::size_t d = L; d > 0; --d) {
        quot[d - 1] = carry;
        carry = addp(full[d - 1], mulp(carry, xs[t]));
      }
      u64 denom = 1;
      for (std::size_t s = 0; s < L; ++s)
        if (s != t) denom = mulp(denom, subp(xs[t], xs[s]));
      u64 winv = invp(denom);
      for (int c = 0; c < C; ++c) {
        u64 f = mulp(ys[t * C + c], winv);
        if (!f) continue;
        for (std::size_t d = 0; d < L; ++d) coef[c * L + d] = addp(coef[c * L + d], mulp(f, quot[d]));
      }
    }
    for (u64 v : coef) out.put(v, 61);
  }
  P.send(tag, std::move(out).finish());
  P.ctr.opprf_calls += 1;
}

std::vector<u64> opprf_recv(Party& P, const std::vector<u64>& queries, std::size_t L, int width, Tag tag) {
  const std::size_t m = queries.size();
  const int W = (width + 63) / 64, C = chunks_for(width);
  std::vector<std::pair<u64, u64>> q(m);
  for (std::size_t j = 0; j < m; ++j) q[j] = {j, queries[j]};
  std::vector<u64> s = P.dealer.oprf_eval(q);
  Bytes in = P.recv(tag);
  if (in.size() != (m * C * L * 61 + 7) / 8) throw ProtocolError("opprf: unexpected hint size");
  BitReader br(in);
  std::vector<u64> out(m * W, 0), coef(L), masks(C);
  for (std::size_t j = 0; j < m; ++j) {
    const u64 x = redp(queries[j]);
    masks_from(s[j], C, masks.data());
    for (int c = 0; c < C; ++c) {
      for (auto& v : coef) v = br.get(61);
      u64 acc = 0;
      for (std::size_t d = L; d > 0; --d) acc = addp(mulp(acc, x), coef[d - 1]);
      put_chunk(&out[j * W], W, c, addp(acc, masks[c]));
    }
    if (width % 64) out[j * W + W - 1] &= mask_bits(width % 64);
  }
  P.ctr.opprf_calls += 1;
  P.ctr.opprf_queries += m;
  return out;
}

namespace {

struct Sizes {
  std::size_t n_recv = 0, n_send = 0, m = 0, L = 0;
  int lprime = 0;
};

Sizes public_sizes(Party& P, int receiver, std::size_t mine, const HashingParams& hp) {
  Bytes b;
  put_u64(b, mine);
  Bytes t = P.exchange(Tag::Setup, b);
  std::size_t pos = 0;
  std::size_t theirs = get_u64(t, pos);
  Sizes s;
  s.n_recv = P.id == receiver ? mine : theirs;
  s.n_send = P.id == receiver ? theirs : mine;
  s.m = table_size(std::max(s.n_recv, s.n_send), hp);
  s.L = simple_max_load(s.n_send, s.m, hp);
  s.lprime = std::min(60, hp.kappa + ceil_log2(std::max<std::size_t>(s.m, 2)));
  return s;
}

// Membership test: shares of 1{receiver's bucket item is in the sender's set}.
void membership(Party& P, Alignment& A, const Sizes& s) {
  if (P.id == A.receiver) {
    auto u = opprf_recv(P, receiver_queries(A.ch), s.L, A.lprime);
    A.b = equal_private(P, u, A.lprime);
  } else {
    OpprfProgram prog = sender_program(A.sh, A.lprime);
    std::vector<u64> t(s.m);
    for (auto& v : t) v = P.rng.next() & mask_bits(A.lprime);
    for (std::size_t a = 0; a < prog.keys.size(); ++a) prog.vals[a] = t[a / s.L];
    opprf_send(P, prog);
    A.b = equal_private(P, t, A.lprime);
  }
}

}  // namespace

std::vector<u64> receiver_queries(const CuckooTable& ch) {
  std::vector<u64> q(ch.m);
  for (std::size_t j = 0; j < ch.m; ++j)
    q[j] = ch.row[j] < 0 ? opprf_keyword(kEmptyQuery, 0) : opprf_keyword(ch.item[j], ch.hidx[j]);
  return q;
}

OpprfProgram sender_program(const SimpleTable& sh, int width) {
  OpprfProgram p;
  p.buckets = sh.m;
  p.max_load = sh.max_load;
  p.width = width;
  p.keys.resize(sh.item.size());
  for (std::size_t a = 0; a < sh.item.size(); ++a)
    p.keys[a] = sh.row[a] < 0 ? kPadItem : opprf_keyword(sh.item[a], sh.hidx[a]);
  p.vals.assign(sh.item.size() * p.words(), 0);
  return p;
}

Alignment circuit_psi(Party& P, int receiver, const PsiInput& in, const HashingParams& hp, int instance) {
  if (in.payload && in.payload->size() != in.ids.size()) throw std::invalid_argument("circuit_psi: payload length");
  Alignment A;
  A.instance = instance;
  A.receiver = receiver;
  A.hp = hp;
  Sizes s = public_sizes(P, receiver, in.ids.size(), hp);
  A.m = s.m;
  A.load = s.L;
  A.lprime = s.lprime;
  const bool recv = P.id == receiver;
  if (recv)
    A.ch = build_cuckoo(in.ids, s.m, hp);
  else
    A.sh = build_simple(in.ids, s.m, hp);
  membership(P, A, s);

  Bytes flag{u8(in.payload ? 1 : 0)};
  Bytes other = P.exchange(Tag::Setup, flag);
  const bool pay_mine = in.payload != nullptr, pay_theirs = other.at(0) != 0;
  const bool recv_pays = recv ? pay_mine : pay_theirs, send_pays = recv ? pay_theirs : pay_mine;
  if (!recv_pays && !send_pays) return A;
  Shares y(s.m, 0);
  if (recv_pays && recv)
    for (std::size_t j = 0; j < s.m; ++j)
      if (A.ch.row[j] >= 0) y[j] = (*in.payload)[A.ch.row[j]];
  if (send_pays) {
    if (recv) {
      auto v = opprf_recv(P, receiver_queries(A.ch), s.L, 64);
      for (std::size_t j = 0; j < s.m; ++j) y[j] += v[j];
    } else {
      OpprfProgram prog = sender_program(A.sh, 64);
      for (std::size_t j = 0; j < s.m; ++j) {
        u64 r = P.rng.next();
        y[j] -= r;
        for (std::size_t t = 0; t < s.L; ++t) {
          int row = A.sh.row[j * s.L + t];
          if (row >= 0) prog.vals[j * s.L + t] = (*in.payload)[row] + r;
        }
      }
      opprf_send(P, prog);
    }
  }
  A.y = mux(P, A.b, y);
  return A;
}

std::array<Alignment, 2> dual_circuit_psi(Party& P, const PsiInput& in, const HashingParams& hp) {
  std::array<Alignment, 2> out;
  for (int i = 0; i < 2; ++i) {
    HashingParams h = hp;
    h.seed = hash64(derive_key(hp.seed, "instance-seed"), {u64(i)});
    out[i] = circuit_psi(P, i, in, h, i);
  }
  return out;
}

BasePsiResult base_circuit_psi(Party& P, const PsiInput& in, const BitMatrix* M, const BitMatrix* Mt,
                               const HashingParams& hp) {
  BasePsiResult R;
  R.inst = circuit_psi(P, 0, in, hp, 0);
  Alignment& A = R.inst;
  // The row count of the matrix payload is public.
  Bytes rb;
  put_u64(rb, P.id == 1 && M ? M->rows : 0);
  Bytes peer = P.exchange(Tag::Setup, rb);
  std::size_t pos = 0;
  const std::size_t rows = P.id == 1 ? (M ? M->rows : 0) : get_u64(peer, pos);
  if (P.id == 1) {
    if (!M || !Mt || M->rows != Mt->rows || M->cols != in.ids.size() || Mt->cols != in.ids.size())
      throw std::invalid_argument("base_circuit_psi: sender matrices must have one column per id");
  }
  const int width = int(2 * rows);
  const std::size_t m = A.m;
  BitVec shares(2 * rows * m, 0);  // [row][bucket], M rows first then M~ rows
  if (width > 0) {
    if (P.id == 0) {
      auto v = opprf_recv(P, receiver_queries(A.ch), A.load, width);
      const int W = (width + 63) / 64;
      for (std::size_t j = 0; j < m; ++j)
        for (int w = 0; w < width; ++w) shares[std::size_t(w) * m + j] = u8((v[j * W + w / 64] >> (w % 64)) & 1);
    } else {
      OpprfProgram prog = sender_program(A.sh, width);
      const int W = prog.words();
      const std::size_t L = A.sh.max_load;
      std::vector<u64> r(W);
      for (std::size_t j = 0; j < m; ++j) {
        for (int w = 0; w < W; ++w) r[w] = P.rng.next();
        if (width % 64) r[W - 1] &= mask_bits(width % 64);
        for (int w = 0; w < width; ++w) shares[std::size_t(w) * m + j] = u8((r[w / 64] >> (w % 64)) & 1);
        for (std::size_t t = 0; t < L; ++t) {
          int row = A.sh.row[j * L + t];
          if (row < 0) continue;
          u64* dst = &prog.vals[(j * L + t) * W];
          for (std::size_t q = 0; q < rows; ++q) {
            dst[q / 64] |= u64(M->at(q, row)) << (q % 64);
            std::size_t q2 = rows + q;
            dst[q2 / 64] |= u64(Mt->at(q, row)) << (q2 % 64);
          }
          for (int w = 0; w < W; ++w) dst[w] ^= r[w];
        }
      }
      opprf_send(P, prog);
    }
    // Zero the columns of buckets without a common item.
    BitVec rep(shares.size());
    for (std::size_t w = 0; w < std::size_t(width); ++w) std::copy(A.b.begin(), A.b.end(), rep.begin() + w * m);
    shares = and_bits(P, shares, rep);
  }
  R.M1.rows = R.Mt1.rows = rows;
  R.M1.cols = R.Mt1.cols = m;
  R.M1.bits.assign(shares.begin(), shares.begin() + rows * m);
  R.Mt1.bits.assign(shares.begin() + rows * m, shares.end());
  return R;
}

}  // namespace ag
