#include <cmath>
#include <stdexcept>

#include "anongbdt/mpc.hpp"

namespace ag {

SigmoidParams SigmoidParams::ours() {
  SigmoidParams p;
  p.J = 3;
  p.L = 3;
  p.a = {0.5, 0.5352260069488296, -0.03360148755581189, 0.05367361423235735};
  return p;
}

SigmoidParams SigmoidParams::squirrel() {
  SigmoidParams p;
  p.J = 8;
  p.L = 3;
  p.a = {0.5,
         0.5681932274926162,
         -0.09202604960660515,
         0.1254701953790971,
         -0.07389070154403289,
         0.06527299001911599,
         -0.052542473341091675,
         0.04558540119456632,
         -0.03972387953645786};
  return p;
}

SigmoidParams SigmoidParams::printed() {
  SigmoidParams p;
  p.J = 3;
  p.L = 4;
  p.a = {0.5, 1.642327, -1.070336, 0.5510985};
  return p;
}

double sigmoid_approx(double x, const SigmoidParams& sp) {
  if (x <= -sp.mu) return 0.0;
  if (x > sp.mu) return 1.0;
  const double w = 2.0 * M_PI / std::ldexp(1.0, sp.L + 1);
  double s = sp.a[0];
  for (int j = 1; j <= sp.J; ++j) s += sp.a[j] * std::sin(j * w * x);
  return s;
}

Shares div(Party& P, const Shares& x, const Shares& y, const DivParams& dp) {
  if (x.size() != y.size()) throw std::invalid_argument("div: length mismatch");
  const int f = P.fp.f;
  if (dp.kmax < 0 || dp.kmin > dp.kmax || dp.kmin < -f || dp.guard < 0 || dp.guard > dp.kmax) throw std::invalid_argument("div: bad exponent window");
  const std::size_t n = x.size();
  if (n == 0) return {};
  const int nk = dp.kmax - dp.kmin + 1;
  const int K = dp.kmax + 1;

  // c_k = 1{y >= 2^k}
  Shares yy(n * nk);
  std::vector<u64> thr(n * nk);
  for (int k = 0; k < nk; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      yy[k * n + i] = y[i];
      thr[k * n + i] = (u64(1) << (dp.kmin + k + f)) - 1;
    }
  BitVec c = greater_pub(P, yy, thr);

  // One-hot leading-bit position, then select (x, y) * 2^(K - k - 1).
  BitVec e(n * nk);
  Shares xs(n * nk), ys(n * nk);
  for (int k = 0; k < nk; ++k) {
    const int sh = dp.kmax - (dp.kmin + k);
    for (std::size_t i = 0; i < n; ++i) {
      u8 next = k + 1 < nk ? c[(k + 1) * n + i] : 0;
      e[k * n + i] = c[k * n + i] ^ next;
      xs[k * n + i] = x[i] << sh;
      ys[k * n + i] = y[i] << sh;
    }
  }
  auto [sx, sy] = mux2(P, e, xs, ys);
  Shares both(2 * n, 0);
  for (int k = 0; k < nk; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      both[i] += sx[k * n + i];
      both[n + i] += sy[k * n + i];
    }
  // x' keeps dp.guard extra fractional bits through the iterations; y' in [0.5, 1) at the usual scale.
  const int kGuard = dp.guard;
  if (kGuard == 0) {
    both = trunc_exact(P, both, K);
  } else {
    Shares xq = trunc_exact(P, Shares(both.begin(), both.begin() + n), K - kGuard);
    Shares yq = trunc_exact(P, Shares(both.begin() + n, both.end()), K);
    std::copy(xq.begin(), xq.end(), both.begin());
    std::copy(yq.begin(), yq.end(), both.begin() + n);
  }

  // Goldschmidt iterations.
  const u64 two = encode_fixed(2.0, P.fp);
  Shares w0(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    u64 v = (P.id == 0 ? encode_fixed(2.9142, P.fp) : 0) - 2 * both[n + i];
    w0[i] = v;
    w0[n + i] = v;
  }
  Shares ab = mul_fixed(P, both, w0);
  Shares a(ab.begin(), ab.begin() + n), b(ab.begin() + n, ab.end());
  for (int it = 0; it < dp.iterations; ++it) {
    Shares r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = (P.id == 0 ? two : 0) - b[i];
    if (it + 1 == dp.iterations) {
      a = mul_fixed(P, a, r);
    } else {
      Shares lhs(a), rhs(r);
      lhs.insert(lhs.end(), b.begin(), b.end());
      rhs.insert(rhs.end(), r.begin(), r.end());
      Shares z = mul_fixed(P, lhs, rhs);
      a.assign(z.begin(), z.begin() + n);
      b.assign(z.begin() + n, z.end());
    }
  }
  if (kGuard == 0) return a;
  if (P.id == 0)
    for (auto& v : a) v += u64(1) << (kGuard - 1);
  return trunc_exact(P, a, kGuard);
}

Shares sigmoid(Party& P, const Shares& x, const SigmoidParams& sp) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (int(sp.a.size()) != sp.J + 1) throw std::invalid_argument("sigmoid: coefficient count must be J+1");
  const int f = P.fp.f;

  // Clip bits c_lo = 1{x > -mu}, c_hi = 1{x > mu}; the thresholds share their low f-delta bits.
  const u64 thi = encode_fixed(sp.mu, P.fp), tlo = encode_fixed(-sp.mu, P.fp);
  int shared = std::max(0, f - sp.delta);
  if ((thi ^ tlo) & mask_bits((shared / 4) * 4)) shared = 0;
  BitVec c = greater_pub_shared_low(P, x, {tlo, thi}, shared);

  // Fourier series by angle addition: each party evaluates trig on its own share.
  const int pb = f + sp.L + 1;
  const u64 pmask = mask_bits(pb);
  const double scale = 2.0 * M_PI / std::ldexp(1.0, pb);
  const std::size_t J = std::size_t(sp.J);
  Shares X(2 * J * n, 0), Y(2 * J * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = double(x[i] & pmask) * scale;
    for (std::size_t j = 1; j <= J; ++j) {
      const double sj = std::sin(double(j) * th), cj = std::cos(double(j) * th);
      if (P.id == 0) {
        X[(j - 1) * n + i] = encode_fixed(sp.a[j] * sj, P.fp);
        X[(J + j - 1) * n + i] = encode_fixed(sp.a[j] * cj, P.fp);
      } else {
        Y[(j - 1) * n + i] = encode_fixed(cj, P.fp);
        Y[(J + j - 1) * n + i] = encode_fixed(sj, P.fp);
      }
    }
  }
  Shares prod = mul(P, X, Y, Tag::Sigmoid);
  Shares S(n, 0);
  for (std::size_t t = 0; t < 2 * J; ++t)
    for (std::size_t i = 0; i < n; ++i) S[i] += prod[t * n + i];
  // Round to nearest rather than floor; a floor here biases every gradient by about one ulp.
  if (P.id == 0)
    for (auto& s : S) s += u64(1) << (f - 1);
  S = trunc_exact(P, S, f);
  if (P.id == 0)
    for (auto& s : S) s += encode_fixed(sp.a[0], P.fp);

  // out = inside ? series : (c_hi ? 1 : 0)
  BitVec bits(2 * n);
  Shares vals(2 * n);
  const u64 one = P.id == 0 ? encode_fixed(1.0, P.fp) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    bits[i] = c[i] ^ c[n + i];
    bits[n + i] = c[n + i];
    vals[i] = S[i];
    vals[n + i] = one;
  }
  Shares m = mux(P, bits, vals);
  Shares out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = m[i] + m[n + i];
  return out;
}

}  // namespace ag
