#include "anongbdt/fixed.hpp"

#include <cmath>
#include <stdexcept>

namespace ag {

void FixedParams::validate() const {
  if (ell < 2 || ell > 64) throw std::invalid_argument("FixedParams: ell must be in [2, 64]");
  if (f <= 0 || f >= ell) throw std::invalid_argument("FixedParams: need 0 < f < ell");
}

i64 to_signed(u64 v, int ell) {
  if (ell >= 64) return static_cast<i64>(v);
  v &= mask_bits(ell);
  u64 sign = u64(1) << (ell - 1);
  return (v & sign) ? static_cast<i64>(v) - static_cast<i64>(u64(1) << ell) : static_cast<i64>(v);
}

u64 encode_fixed(double x, const FixedParams& p) {
  p.validate();
  if (!std::isfinite(x)) throw std::range_error("encode_fixed: non-finite input");
  long double scaled = std::nearbyint(static_cast<long double>(x) * std::ldexp(1.0L, p.f));
  long double lim = std::ldexp(1.0L, p.ell - 1);
  if (scaled >= lim || scaled < -lim) throw std::range_error("encode_fixed: value outside encoding range");
  return static_cast<u64>(static_cast<i64>(scaled)) & p.ring_mask();
}

double decode_fixed(u64 v, const FixedParams& p) {
  return std::ldexp(static_cast<double>(to_signed(v, p.ell)), -p.f);
}

ArithPair share_arith(u64 x, Prg& rng, const FixedParams& p) {
  u64 r = rng.next() & p.ring_mask();
  return {(x - r) & p.ring_mask(), r};
}

u64 reconstruct_arith(u64 s0, u64 s1, const FixedParams& p) { return (s0 + s1) & p.ring_mask(); }

std::pair<std::vector<u64>, std::vector<u64>> share_arith(const std::vector<u64>& x, Prg& rng,
                                                          const FixedParams& p) {
  std::vector<u64> a(x.size()), b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto s = share_arith(x[i], rng, p);
    a[i] = s.s0;
    b[i] = s.s1;
  }
  return {a, b};
}

std::vector<u64> reconstruct_arith(const std::vector<u64>& s0, const std::vector<u64>& s1, const FixedParams& p) {
  if (s0.size() != s1.size()) throw std::invalid_argument("reconstruct_arith: length mismatch");
  std::vector<u64> r(s0.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (s0[i] + s1[i]) & p.ring_mask();
  return r;
}

std::pair<BitVec, BitVec> share_bool(const BitVec& x, Prg& rng) {
  BitVec a(x.size()), b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    b[i] = rng.bit();
    a[i] = (x[i] & 1) ^ b[i];
  }
  return {a, b};
}

BitVec reconstruct_bool(const BitVec& s0, const BitVec& s1) { return xor_shares(s0, s1); }

static void check_len(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("share length mismatch");
}

std::vector<u64> add_shares(const std::vector<u64>& a, const std::vector<u64>& b, const FixedParams& p) {
  check_len(a.size(), b.size());
  std::vector<u64> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] + b[i]) & p.ring_mask();
  return r;
}

std::vector<u64> sub_shares(const std::vector<u64>& a, const std::vector<u64>& b, const FixedParams& p) {
  check_len(a.size(), b.size());
  std::vector<u64> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] - b[i]) & p.ring_mask();
  return r;
}

std::vector<u64> scale_shares(const std::vector<u64>& a, u64 c, const FixedParams& p) {
  std::vector<u64> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] * c) & p.ring_mask();
  return r;
}

std::vector<u64> add_public(const std::vector<u64>& a, u64 c, int party, const FixedParams& p) {
  std::vector<u64> r(a);
  if (party == 0)
    for (auto& v : r) v = (v + c) & p.ring_mask();
  return r;
}

std::vector<u64> local_linear(const std::vector<std::vector<u64>>& shares, const std::vector<u64>& coeffs,
                              const FixedParams& p) {
  if (shares.size() != coeffs.size()) throw std::invalid_argument("local_linear: coefficient count mismatch");
  if (shares.empty()) return {};
  std::vector<u64> r(shares[0].size(), 0);
  for (std::size_t k = 0; k < shares.size(); ++k) {
    check_len(shares[k].size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += coeffs[k] * shares[k][i];
  }
  for (auto& v : r) v &= p.ring_mask();
  return r;
}

BitVec xor_shares(const BitVec& a, const BitVec& b) {
  check_len(a.size(), b.size());
  BitVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] ^ b[i]) & 1;
  return r;
}

BitVec not_share(const BitVec& a, int party) {
  BitVec r(a);
  if (party == 0)
    for (auto& v : r) v ^= 1;
  return r;
}

u64 truncate_share(u64 s, int party, int shift, const FixedParams& p) {
  const u64 m = p.ring_mask();
  if (party == 0) return static_cast<u64>(to_signed(s, p.ell) >> shift) & m;
  u64 neg = (0 - s) & m;
  return (0 - static_cast<u64>(to_signed(neg, p.ell) >> shift)) & m;
}

std::vector<u64> truncate_shares(const std::vector<u64>& s, int party, int shift, const FixedParams& p) {
  std::vector<u64> r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) r[i] = truncate_share(s[i], party, shift, p);
  return r;
}

}  // namespace ag
