#include <bit>
#include <cstring>
#include <stdexcept>

#include "anongbdt/he.hpp"

namespace ag {

void HeParams::validate() const {
  auto pow2 = [](int x) { return x > 0 && (x & (x - 1)) == 0; };
  if (!pow2(N) || !pow2(N_small) || N_small > N / 2) throw std::invalid_argument("HeParams: bad dimensions");
  if (logQ > 120 || logQ <= ell || ell != 64) throw std::invalid_argument("HeParams: need ell = 64 < logQ <= 120");
  if (gadget_log < 1 || gadget_log > 30 || cbd_k < 1 || cbd_k > 32) throw std::invalid_argument("HeParams: bad gadget or error");
}

HeContext::HeContext(const HeParams& p) : p_(p) {
  p_.validate();
  qmask_ = (u128(1) << p_.logQ) - 1;
  big_ = std::make_unique<NttRing>(p_.N);
  small_ = std::make_unique<NttRing>(p_.N_small);
}

const NttRing& HeContext::ring(int dim) const {
  if (dim == p_.N) return *big_;
  if (dim == p_.N_small) return *small_;
  throw std::invalid_argument("HeContext: unknown ring dimension");
}

namespace {

u128 neg(u128 x, u128 mask) { return (0 - x) & mask; }

SmallPoly sample_ternary(Prg& rng, int n) {
  SmallPoly s(n);
  for (auto& v : s) v = i64(rng.uniform(3)) - 1;
  return s;
}

SmallPoly sample_error(Prg& rng, int n, int k) {
  SmallPoly e(n);
  const u64 m = (u64(1) << k) - 1;
  for (auto& v : e) {
    u64 r = rng.next();
    v = i64(std::popcount(r & m)) - i64(std::popcount((r >> 32) & m));
  }
  return e;
}

Poly sample_uniform(Prg& rng, int n, u128 mask) {
  Poly a(n);
  for (auto& v : a) v = rng.next128() & mask;
  return a;
}

u128 lift(i64 v, u128 mask) { return v >= 0 ? u128(v) : neg(u128(-v), mask); }

// b = -a*s + e + m_scaled
Poly rlwe_body(const HeContext& ctx, const NttRing& R, const NttRing::Ntt& a_ntt, const NttRing::Ntt& s_ntt,
               const SmallPoly& e) {
  Poly as = R.inverse(R.mul(a_ntt, s_ntt), ctx.qmask());
  Poly b(as.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = (lift(e[i], ctx.qmask()) - as[i]) & ctx.qmask();
  return b;
}

void put_poly(Bytes& out, const Poly& p) {
  std::size_t off = out.size();
  out.resize(off + p.size() * 16);
  for (std::size_t i = 0; i < p.size(); ++i) {
    u64 lo = u64(p[i]), hi = u64(p[i] >> 64);
    for (int k = 0; k < 8; ++k) {
      out[off + 16 * i + k] = u8(lo >> (8 * k));
      out[off + 16 * i + 8 + k] = u8(hi >> (8 * k));
    }
  }
}

Poly get_poly(const Bytes& in, std::size_t& pos, std::size_t n, u128 mask) {
  if (pos + n * 16 > in.size()) throw std::runtime_error("he: truncated polynomial");
  Poly p(n);
  for (std::size_t i = 0; i < n; ++i) {
    u64 lo = 0, hi = 0;
    for (int k = 0; k < 8; ++k) {
      lo |= u64(in[pos + 16 * i + k]) << (8 * k);
      hi |= u64(in[pos + 16 * i + 8 + k]) << (8 * k);
    }
    p[i] = ((u128(hi) << 64) | lo);
    if (p[i] & ~mask) throw std::runtime_error("he: coefficient out of range");
  }
  pos += n * 16;
  return p;
}

void put_u32(Bytes& out, u32 v) {
  for (int k = 0; k < 4; ++k) out.push_back(u8(v >> (8 * k)));
}
u32 get_u32(const Bytes& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw std::runtime_error("he: truncated header");
  u32 v = 0;
  for (int k = 0; k < 4; ++k) v |= u32(in[pos + k]) << (8 * k);
  pos += 4;
  return v;
}

void put_header(Bytes& out, const HeParams& p) {
  put_u32(out, p.N);
  put_u32(out, p.N_small);
  put_u32(out, p.logQ);
  put_u32(out, p.ell);
}
void check_header(const Bytes& in, std::size_t& pos, const HeParams& p) {
  u32 N = get_u32(in, pos), Ns = get_u32(in, pos), lq = get_u32(in, pos), ell = get_u32(in, pos);
  if (int(N) != p.N || int(Ns) != p.N_small || int(lq) != p.logQ || int(ell) != p.ell)
    throw std::runtime_error("he: parameter header mismatch");
}

std::vector<Poly> ksk_a(const HeContext& ctx, const Key& seed, int digits) {
  std::vector<Poly> a;
  for (int j = 0; j < digits; ++j) a.push_back(expand_uniform(ctx, derive_key(seed, "ksk", {u64(j)}), ctx.params().N));
  return a;
}

void finish_ksk(const HeContext& ctx, KeySwitchKey& k) {
  const NttRing& R = ctx.ring(ctx.params().N);
  auto a = ksk_a(ctx, k.seed, ctx.params().digits());
  k.a_ntt.clear();
  k.b_ntt.clear();
  for (std::size_t j = 0; j < a.size(); ++j) {
    k.a_ntt.push_back(R.forward_big(a[j]));
    k.b_ntt.push_back(R.forward_big(k.b[j]));
  }
}

void finish_pk(const HeContext& ctx, PublicKey& pk) {
  const NttRing& R = ctx.ring(int(pk.b.size()));
  pk.a_ntt = R.forward_big(expand_uniform(ctx, pk.seed, int(pk.b.size())));
  pk.b_ntt = R.forward_big(pk.b);
}

PublicKey make_pk(const HeContext& ctx, const SecretKey& sk, int dim, Prg& rng) {
  PublicKey pk;
  rng.fill(pk.seed.data(), pk.seed.size());
  const NttRing& R = ctx.ring(dim);
  Poly a = expand_uniform(ctx, pk.seed, dim);
  pk.b = rlwe_body(ctx, R, R.forward_big(a), sk.ntt(dim, ctx), sample_error(rng, dim, ctx.params().cbd_k));
  finish_pk(ctx, pk);
  return pk;
}

}  // namespace

Poly expand_uniform(const HeContext& ctx, const Key& seed, int dim) {
  Prg g(seed);
  return sample_uniform(g, dim, ctx.qmask());
}

SmallPoly derived_small_secret(const HeContext& ctx, const SmallPoly& s_small) {
  const int N = ctx.params().N;
  SmallPoly out(N, 0);
  out[0] = s_small[0];
  for (std::size_t k = 1; k < s_small.size(); ++k) out[N - k] = -s_small[k];
  return out;
}

KeySwitchKey make_ksk(const HeContext& ctx, const SmallPoly& source, const SecretKey& target, Prg& rng) {
  const HeParams& P = ctx.params();
  const NttRing& R = ctx.ring(P.N);
  KeySwitchKey k;
  rng.fill(k.seed.data(), k.seed.size());
  auto a = ksk_a(ctx, k.seed, P.digits());
  for (int j = 0; j < P.digits(); ++j) {
    Poly b = rlwe_body(ctx, R, R.forward_big(a[j]), target.s_big_ntt, sample_error(rng, P.N, P.cbd_k));
    const int sh = j * P.gadget_log;
    if (sh < P.logQ)
      for (int i = 0; i < P.N; ++i) b[i] = (b[i] + (lift(source[i], ctx.qmask()) << sh)) & ctx.qmask();
    k.b.push_back(std::move(b));
  }
  finish_ksk(ctx, k);
  return k;
}

KeyMaterial keygen(const HeContext& ctx, Prg& rng) {
  const HeParams& P = ctx.params();
  KeyMaterial km;
  SecretKey& sk = km.sk;
  sk.s_big = sample_ternary(rng, P.N);
  sk.s_small = sample_ternary(rng, P.N_small);
  sk.s_big_ntt = ctx.ring(P.N).forward_small(sk.s_big);
  sk.s_small_ntt = ctx.ring(P.N_small).forward_small(sk.s_small);
  km.ev.lift = make_ksk(ctx, derived_small_secret(ctx, sk.s_small), sk, rng);
  for (int j = 1; (1 << j) <= P.N; ++j) {
    u32 g = (1u << j) + 1;
    const u32 twoN = 2 * u32(P.N);
    SmallPoly src(P.N, 0);
    for (int i = 0; i < P.N; ++i) {
      u32 idx = u32((u64(i) * g) % twoN);
      if (idx >= u32(P.N))
        src[idx - P.N] -= sk.s_big[i];
      else
        src[idx] += sk.s_big[i];
    }
    km.ev.autos[g] = make_ksk(ctx, src, sk, rng);
  }
  km.ev.pk_big = make_pk(ctx, sk, P.N, rng);
  km.ev.pk_small = make_pk(ctx, sk, P.N_small, rng);
  return km;
}

Bytes serialize_eval(const HeContext& ctx, const EvalKeys& ev) {
  Bytes out;
  put_header(out, ctx.params());
  auto put_ksk = [&](const KeySwitchKey& k) {
    out.insert(out.end(), k.seed.begin(), k.seed.end());
    for (const auto& b : k.b) put_poly(out, b);
  };
  put_ksk(ev.lift);
  put_u32(out, u32(ev.autos.size()));
  for (const auto& [g, k] : ev.autos) {
    put_u32(out, g);
    put_ksk(k);
  }
  for (const PublicKey* pk : {&ev.pk_big, &ev.pk_small}) {
    out.insert(out.end(), pk->seed.begin(), pk->seed.end());
    put_poly(out, pk->b);
  }
  return out;
}

EvalKeys deserialize_eval(const HeContext& ctx, const Bytes& in) {
  const HeParams& P = ctx.params();
  std::size_t pos = 0;
  check_header(in, pos, P);
  auto get_seed = [&](Key& k) {
    if (pos + 32 > in.size()) throw std::runtime_error("he: truncated key");
    std::memcpy(k.data(), in.data() + pos, 32);
    pos += 32;
  };
  auto get_ksk = [&]() {
    KeySwitchKey k;
    get_seed(k.seed);
    for (int j = 0; j < P.digits(); ++j) k.b.push_back(get_poly(in, pos, P.N, ctx.qmask()));
    finish_ksk(ctx, k);
    return k;
  };
  EvalKeys ev;
  ev.lift = get_ksk();
  u32 na = get_u32(in, pos);
  if (na > 64) throw std::runtime_error("he: too many automorphism keys");
  for (u32 i = 0; i < na; ++i) {
    u32 g = get_u32(in, pos);
    ev.autos[g] = get_ksk();
  }
  for (auto [pk, dim] : {std::pair{&ev.pk_big, P.N}, std::pair{&ev.pk_small, P.N_small}}) {
    get_seed(pk->seed);
    pk->b = get_poly(in, pos, dim, ctx.qmask());
    finish_pk(ctx, *pk);
  }
  if (pos != in.size()) throw std::runtime_error("he: trailing bytes in key blob");
  return ev;
}

Bytes serialize_rlwe(const HeContext& ctx, const Rlwe& ct) {
  Bytes out;
  put_header(out, ctx.params());
  put_u32(out, u32(ct.dim()));
  put_poly(out, ct.a);
  put_poly(out, ct.b);
  return out;
}

Rlwe deserialize_rlwe(const HeContext& ctx, const Bytes& in) {
  std::size_t pos = 0;
  check_header(in, pos, ctx.params());
  int dim = int(get_u32(in, pos));
  ctx.ring(dim);  // validates
  Rlwe ct;
  ct.a = get_poly(in, pos, dim, ctx.qmask());
  ct.b = get_poly(in, pos, dim, ctx.qmask());
  if (pos != in.size()) throw std::runtime_error("he: trailing bytes in ciphertext");
  return ct;
}

namespace {

Rlwe encrypt_with_a(const HeContext& ctx, const SecretKey& sk, int dim, const std::vector<u64>& m, int log_scale,
                    Prg& rng, Poly a) {
  if (m.size() > std::size_t(dim)) throw std::invalid_argument("rlwe_encrypt: too many plaintext values");
  if (log_scale < 0 || log_scale >= ctx.params().logQ) throw std::invalid_argument("rlwe_encrypt: bad scale");
  const NttRing& R = ctx.ring(dim);
  Rlwe ct;
  ct.b = rlwe_body(ctx, R, R.forward_big(a), sk.ntt(dim, ctx), sample_error(rng, dim, ctx.params().cbd_k));
  for (std::size_t i = 0; i < m.size(); ++i) ct.b[i] = (ct.b[i] + (u128(m[i]) << log_scale)) & ctx.qmask();
  ct.a = std::move(a);
  return ct;
}

}  // namespace

Rlwe rlwe_encrypt(const HeContext& ctx, const SecretKey& sk, int dim, const std::vector<u64>& m, int log_scale,
                  Prg& rng) {
  Poly a = sample_uniform(rng, dim, ctx.qmask());
  return encrypt_with_a(ctx, sk, dim, m, log_scale, rng, std::move(a));
}

Rlwe rlwe_encrypt_seeded(const HeContext& ctx, const SecretKey& sk, int dim, const std::vector<u64>& m,
                         int log_scale, Prg& rng, Key& seed) {
  rng.fill(seed.data(), seed.size());
  return encrypt_with_a(ctx, sk, dim, m, log_scale, rng, expand_uniform(ctx, seed, dim));
}

Poly rlwe_phase(const HeContext& ctx, const SecretKey& sk, const Rlwe& ct) {
  const int dim = int(ct.dim());
  const NttRing& R = ctx.ring(dim);
  Poly as = R.inverse(R.mul(R.forward_big(ct.a), sk.ntt(dim, ctx)), ctx.qmask());
  for (int i = 0; i < dim; ++i) as[i] = (as[i] + ct.b[i]) & ctx.qmask();
  return as;
}

u64 decode_phase(const HeContext& ctx, u128 phase, int log_scale) {
  u128 r = log_scale > 0 ? (phase + (u128(1) << (log_scale - 1))) & ctx.qmask() : phase;
  return u64(r >> log_scale);
}

std::vector<u64> rlwe_decrypt(const HeContext& ctx, const SecretKey& sk, const Rlwe& ct, int log_scale) {
  Poly ph = rlwe_phase(ctx, sk, ct);
  std::vector<u64> out(ph.size());
  for (std::size_t i = 0; i < ph.size(); ++i) out[i] = decode_phase(ctx, ph[i], log_scale);
  return out;
}

Lwe lwe_encrypt(const HeContext& ctx, const SecretKey& sk, int dim, u64 m, int log_scale, Prg& rng) {
  const SmallPoly& s = dim == ctx.params().N ? sk.s_big : sk.s_small;
  if (int(s.size()) != dim) throw std::invalid_argument("lwe_encrypt: bad dimension");
  Lwe ct;
  ct.a = sample_uniform(rng, dim, ctx.qmask());
  u128 acc = 0;
  for (int i = 0; i < dim; ++i) acc += ct.a[i] * lift(s[i], ctx.qmask());
  i64 e = sample_error(rng, 1, ctx.params().cbd_k)[0];
  ct.b = (acc + lift(e, ctx.qmask()) + (u128(m) << log_scale)) & ctx.qmask();
  return ct;
}

u128 lwe_phase(const HeContext& ctx, const SecretKey& sk, const Lwe& ct) {
  const SmallPoly& s = ct.a.size() == std::size_t(ctx.params().N) ? sk.s_big : sk.s_small;
  if (s.size() != ct.a.size()) throw std::invalid_argument("lwe_phase: bad dimension");
  u128 acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += ct.a[i] * lift(s[i], ctx.qmask());
  return (ct.b - acc) & ctx.qmask();
}

u64 lwe_decrypt(const HeContext& ctx, const SecretKey& sk, const Lwe& ct, int log_scale) {
  return decode_phase(ctx, lwe_phase(ctx, sk, ct), log_scale);
}

void add_inplace(const HeContext& ctx, Rlwe& x, const Rlwe& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("rlwe add: dimension mismatch");
  const u128 m = ctx.qmask();
  for (std::size_t i = 0; i < x.dim(); ++i) {
    x.a[i] = (x.a[i] + y.a[i]) & m;
    x.b[i] = (x.b[i] + y.b[i]) & m;
  }
}

void sub_inplace(const HeContext& ctx, Rlwe& x, const Rlwe& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("rlwe sub: dimension mismatch");
  const u128 m = ctx.qmask();
  for (std::size_t i = 0; i < x.dim(); ++i) {
    x.a[i] = (x.a[i] - y.a[i]) & m;
    x.b[i] = (x.b[i] - y.b[i]) & m;
  }
}

void add_inplace(const HeContext& ctx, Lwe& x, const Lwe& y) {
  if (x.a.size() != y.a.size()) throw std::invalid_argument("lwe add: dimension mismatch");
  const u128 m = ctx.qmask();
  for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] = (x.a[i] + y.a[i]) & m;
  x.b = (x.b + y.b) & m;
}

void sub_inplace(const HeContext& ctx, Lwe& x, const Lwe& y) {
  if (x.a.size() != y.a.size()) throw std::invalid_argument("lwe sub: dimension mismatch");
  const u128 m = ctx.qmask();
  for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] = (x.a[i] - y.a[i]) & m;
  x.b = (x.b - y.b) & m;
}

Rlwe mul_monomial(const HeContext& ctx, const Rlwe& x, int k) {
  const int n = int(x.dim());
  k %= 2 * n;
  if (k < 0) k += 2 * n;
  const u128 m = ctx.qmask();
  Rlwe out{Poly(n), Poly(n)};
  for (int i = 0; i < n; ++i) {
    int j = i + k;
    bool flip = false;
    if (j >= 2 * n) j -= 2 * n;
    if (j >= n) {
      j -= n;
      flip = true;
    }
    out.a[j] = flip ? neg(x.a[i], m) : x.a[i];
    out.b[j] = flip ? neg(x.b[i], m) : x.b[i];
  }
  return out;
}

Rlwe shl(const HeContext& ctx, const Rlwe& x, int bits) {
  Rlwe out = x;
  for (auto& v : out.a) v = (v << bits) & ctx.qmask();
  for (auto& v : out.b) v = (v << bits) & ctx.qmask();
  return out;
}

Lwe extract_lwe(const HeContext& ctx, const Rlwe& ct, int i) {
  const int n = int(ct.dim());
  if (i < 0 || i >= n) throw std::out_of_range("extract_lwe: index out of range");
  Lwe out;
  out.a.assign(n, 0);
  extract_accumulate(ctx, ct, i, out);
  return out;
}

void extract_accumulate(const HeContext& ctx, const Rlwe& ct, int i, Lwe& acc) {
  // a~_k = -a_{i-k} for k <= i and a_{n+i-k} for k > i.
  const int n = int(ct.dim());
  if (acc.a.size() != std::size_t(n)) throw std::invalid_argument("extract_accumulate: dimension mismatch");
  const u128 m = ctx.qmask();
  u128* out = acc.a.data();
  const u128* a = ct.a.data();
  for (int k = 0; k <= i; ++k) out[k] = (out[k] - a[i - k]) & m;
  for (int k = i + 1; k < n; ++k) out[k] = (out[k] + a[n + i - k]) & m;
  acc.b = (acc.b + ct.b[i]) & m;
}

Rlwe lwe_to_rlwe(const HeContext& ctx, const Lwe& ct) {
  const int n = int(ct.a.size());
  const u128 m = ctx.qmask();
  Rlwe out{Poly(n, 0), Poly(n, 0)};
  out.a[0] = neg(ct.a[0], m);
  for (int k = 1; k < n; ++k) out.a[n - k] = ct.a[k];
  out.b[0] = ct.b;
  return out;
}

Poly apply_automorphism(const HeContext& ctx, const Poly& x, u32 g) {
  const u64 n = x.size(), twoN = 2 * n;
  if (!(g & 1)) throw std::invalid_argument("automorphism: index must be odd");
  const u128 m = ctx.qmask();
  Poly out(n, 0);
  for (u64 i = 0; i < n; ++i) {
    u64 idx = (i * g) % twoN;
    if (idx >= n)
      out[idx - n] = neg(x[i], m);
    else
      out[idx] = x[i];
  }
  return out;
}

Rlwe key_switch(const HeContext& ctx, const Rlwe& ct, const KeySwitchKey& ksk) {
  const HeParams& P = ctx.params();
  if (int(ct.dim()) != P.N) throw std::invalid_argument("key_switch: ciphertext must have dimension N");
  if (int(ksk.a_ntt.size()) != P.digits()) throw std::invalid_argument("key_switch: malformed key");
  const NttRing& R = ctx.ring(P.N);
  const int w = P.gadget_log;
  const u128 dmask = (u128(1) << w) - 1;
  const i64 half = i64(1) << (w - 1);
  std::vector<SmallPoly> dig(P.digits(), SmallPoly(P.N));
  for (int i = 0; i < P.N; ++i) {
    u128 v = ct.a[i];
    for (int j = 0; j < P.digits(); ++j) {
      i64 d = i64(v & dmask);
      v >>= w;
      if (d >= half) {
        d -= i64(1) << w;
        v += 1;
      }
      dig[j][i] = d;
    }
  }
  NttRing::Ntt acc_a(std::size_t(NttRing::kPrimes) * P.N, 0), acc_b(acc_a.size(), 0);
  for (int j = 0; j < P.digits(); ++j) {
    NttRing::Ntt D = R.forward_small(dig[j]);
    R.mul_acc(acc_a, D, ksk.a_ntt[j]);
    R.mul_acc(acc_b, D, ksk.b_ntt[j]);
  }
  Rlwe out;
  out.a = R.inverse(acc_a, ctx.qmask());
  out.b = R.inverse(acc_b, ctx.qmask());
  for (int i = 0; i < P.N; ++i) out.b[i] = (out.b[i] + ct.b[i]) & ctx.qmask();
  ctx.counters().keyswitch++;
  return out;
}

Rlwe eval_auto(const HeContext& ctx, const Rlwe& ct, u32 g, const EvalKeys& ev) {
  const u32 twoN = 2 * u32(ctx.params().N);
  g %= twoN;
  if (g == 1) return ct;
  auto it = ev.autos.find(g);
  if (it == ev.autos.end()) throw std::invalid_argument("eval_auto: missing automorphism key");
  Rlwe t{apply_automorphism(ctx, ct.a, g), apply_automorphism(ctx, ct.b, g)};
  ctx.counters().automorphism++;
  return key_switch(ctx, t, it->second);
}

void rerandomize(const HeContext& ctx, Rlwe& ct, const PublicKey& pk, Prg& rng) {
  const int dim = int(ct.dim());
  if (pk.b.size() != ct.dim()) throw std::invalid_argument("rerandomize: dimension mismatch");
  const NttRing& R = ctx.ring(dim);
  auto U = R.forward_small(sample_ternary(rng, dim));
  Poly ua = R.inverse(R.mul(U, pk.a_ntt), ctx.qmask());
  Poly ub = R.inverse(R.mul(U, pk.b_ntt), ctx.qmask());
  auto e1 = sample_error(rng, dim, ctx.params().cbd_k), e2 = sample_error(rng, dim, ctx.params().cbd_k);
  for (int i = 0; i < dim; ++i) {
    ct.a[i] = (ct.a[i] + ua[i] + lift(e1[i], ctx.qmask())) & ctx.qmask();
    ct.b[i] = (ct.b[i] + ub[i] + lift(e2[i], ctx.qmask())) & ctx.qmask();
  }
}

}  // namespace ag
