#include <stdexcept>

#include "anongbdt/he.hpp"

namespace ag {

namespace {

u64 mulmod(u64 a, u64 b, u64 p) { return u64((u128(a) * b) % p); }

u64 powmod(u64 a, u64 e, u64 p) {
  u64 r = 1;
  while (e) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % q == 0) return n == q;
  }
  u64 d = n - 1;
  int s = 0;
  while (!(d & 1)) {
    d >>= 1;
    ++s;
  }
  // These bases are deterministic for all 64-bit n.
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        comp = false;
        break;
      }
    }
    if (comp) return false;
  }
  return true;
}

std::vector<u64> find_primes() {
  std::vector<u64> out;
  for (u64 k = ((u64(1) << 61) - 1) >> 16; out.size() < NttRing::kPrimes; --k) {
    u64 p = (k << 16) + 1;
    if (p < (u64(1) << 61) && is_prime(p)) out.push_back(p);
  }
  return out;
}

struct Shoup {
  u64 w, wp;
};

Shoup shoup(u64 w, u64 p) { return {w, u64((u128(w) << 64) / p)}; }

inline u64 mul_shoup(u64 x, const Shoup& s, u64 p) {
  u64 q = u64((u128(x) * s.wp) >> 64);
  u64 r = x * s.w - q * p;
  return r >= p ? r - p : r;
}

int bitrev(int x, int logn) {
  int r = 0;
  for (int i = 0; i < logn; ++i) r |= ((x >> i) & 1) << (logn - 1 - i);
  return r;
}

}  // namespace

struct NttRing::Impl {
  std::vector<u64> p;
  std::vector<std::vector<Shoup>> psi, ipsi;
  std::vector<Shoup> ninv;
  // Garner constants
  u64 inv1_mod2, inv12_mod3, p1_mod3;
  u128 p12, Pmod;
};

NttRing::NttRing(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2 || (n & (n - 1)) || n > (1 << 15)) throw std::invalid_argument("NttRing: n must be a power of two <= 2^15");
  static const std::vector<u64> primes = find_primes();
  auto& I = *impl_;
  I.p = primes;
  int logn = 0;
  while ((1 << logn) < n) ++logn;
  for (u64 p : I.p) {
    u64 psi = 0;
    for (u64 g = 2;; ++g) {
      psi = powmod(g, (p - 1) / (2 * u64(n)), p);
      if (powmod(psi, n, p) == p - 1) break;
    }
    u64 ipsi = powmod(psi, p - 2, p);
    std::vector<Shoup> t(n), it(n);
    for (int k = 0; k < n; ++k) {
      int e = bitrev(k, logn);
      t[k] = shoup(powmod(psi, e, p), p);
      it[k] = shoup(powmod(ipsi, e, p), p);
    }
    I.psi.push_back(std::move(t));
    I.ipsi.push_back(std::move(it));
    I.ninv.push_back(shoup(powmod(n, p - 2, p), p));
  }
  const u64 p1 = I.p[0], p2 = I.p[1], p3 = I.p[2];
  I.inv1_mod2 = powmod(p1 % p2, p2 - 2, p2);
  I.p1_mod3 = p1 % p3;
  I.inv12_mod3 = powmod(mulmod(p1 % p3, p2 % p3, p3), p3 - 2, p3);
  I.p12 = u128(p1) * p2;
  I.Pmod = I.p12 * p3;  // wraps mod 2^128
}

NttRing::~NttRing() = default;

u64 NttRing::prime(int i) const { return impl_->p[i]; }

namespace {

void ntt_forward(u64* a, int n, const std::vector<Shoup>& psi, u64 p) {
  int t = n;
  for (int m = 1; m < n; m <<= 1) {
    t >>= 1;
    for (int i = 0; i < m; ++i) {
      const Shoup& W = psi[m + i];
      u64* x = a + 2 * i * t;
      u64* y = x + t;
      for (int j = 0; j < t; ++j) {
        u64 U = x[j], V = mul_shoup(y[j], W, p);
        u64 s = U + V;
        x[j] = s >= p ? s - p : s;
        y[j] = U >= V ? U - V : U + p - V;
      }
    }
  }
}

void ntt_inverse(u64* a, int n, const std::vector<Shoup>& ipsi, const Shoup& ninv, u64 p) {
  int t = 1;
  for (int m = n; m > 1; m >>= 1) {
    int h = m >> 1, j1 = 0;
    for (int i = 0; i < h; ++i) {
      const Shoup& W = ipsi[h + i];
      u64* x = a + j1;
      u64* y = x + t;
      for (int j = 0; j < t; ++j) {
        u64 U = x[j], V = y[j];
        u64 s = U + V;
        x[j] = s >= p ? s - p : s;
        y[j] = mul_shoup(U >= V ? U - V : U + p - V, W, p);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (int j = 0; j < n; ++j) a[j] = mul_shoup(a[j], ninv, p);
}

}  // namespace

NttRing::Ntt NttRing::forward_big(const Poly& x) const {
  if (int(x.size()) != n_) throw std::invalid_argument("NttRing: size mismatch");
  Ntt out(std::size_t(kPrimes) * n_);
  for (int k = 0; k < kPrimes; ++k) {
    const u64 p = impl_->p[k];
    u64* o = out.data() + std::size_t(k) * n_;
    for (int i = 0; i < n_; ++i) o[i] = u64(x[i] % p);
    ntt_forward(o, n_, impl_->psi[k], p);
  }
  return out;
}

NttRing::Ntt NttRing::forward_small(const SmallPoly& x) const {
  if (int(x.size()) != n_) throw std::invalid_argument("NttRing: size mismatch");
  Ntt out(std::size_t(kPrimes) * n_);
  for (int k = 0; k < kPrimes; ++k) {
    const u64 p = impl_->p[k];
    u64* o = out.data() + std::size_t(k) * n_;
    for (int i = 0; i < n_; ++i) {
      i64 v = x[i];
      o[i] = v >= 0 ? u64(v) % p : (p - u64(-v) % p) % p;
    }
    ntt_forward(o, n_, impl_->psi[k], p);
  }
  return out;
}

Poly NttRing::inverse(const Ntt& x, u128 qmask) const {
  Ntt t(x);
  for (int k = 0; k < kPrimes; ++k)
    ntt_inverse(t.data() + std::size_t(k) * n_, n_, impl_->ipsi[k], impl_->ninv[k], impl_->p[k]);
  const auto& I = *impl_;
  const u64 p1 = I.p[0], p2 = I.p[1], p3 = I.p[2];
  Poly out(n_);
  for (int i = 0; i < n_; ++i) {
    u64 r1 = t[i], r2 = t[n_ + i], r3 = t[2 * n_ + i];
    u64 r1m2 = r1 % p2;
    u64 t2 = mulmod(r2 >= r1m2 ? r2 - r1m2 : r2 + p2 - r1m2, I.inv1_mod2, p2);
    u64 x3 = (r1 % p3 + mulmod(I.p1_mod3, t2, p3)) % p3;
    u64 t3 = mulmod(r3 >= x3 ? r3 - x3 : r3 + p3 - x3, I.inv12_mod3, p3);
    u128 v = u128(r1) + u128(p1) * t2 + I.p12 * t3;
    if (t3 > p3 / 2) v -= I.Pmod;
    out[i] = v & qmask;
  }
  return out;
}

void NttRing::mul_acc(Ntt& acc, const Ntt& x, const Ntt& y) const {
  for (int k = 0; k < kPrimes; ++k) {
    const u64 p = impl_->p[k];
    const std::size_t off = std::size_t(k) * n_;
    for (int i = 0; i < n_; ++i) {
      u64 v = mulmod(x[off + i], y[off + i], p) + acc[off + i];
      acc[off + i] = v >= p ? v - p : v;
    }
  }
}

NttRing::Ntt NttRing::mul(const Ntt& x, const Ntt& y) const {
  Ntt acc(x.size(), 0);
  mul_acc(acc, x, y);
  return acc;
}

}  // namespace ag
