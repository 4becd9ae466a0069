#pragma once
#include <utility>
#include <vector>

#include "anongbdt/bits.hpp"

namespace ag {

struct FixedParams {
  int ell = 64;
  int f = 20;
  void validate() const;
  u64 ring_mask() const { return mask_bits(ell); }
};

// Two's-complement embedding of round(x * 2^f) into Z_{2^ell}.
u64 encode_fixed(double x, const FixedParams& p = {});
double decode_fixed(u64 v, const FixedParams& p = {});
// Signed value of a ring element under the ell-bit two's-complement reading.
i64 to_signed(u64 v, int ell = 64);

struct ArithPair {
  u64 s0, s1;
};
ArithPair share_arith(u64 x, Prg& rng, const FixedParams& p = {});
u64 reconstruct_arith(u64 s0, u64 s1, const FixedParams& p = {});
std::pair<std::vector<u64>, std::vector<u64>> share_arith(const std::vector<u64>& x, Prg& rng,
                                                          const FixedParams& p = {});
std::vector<u64> reconstruct_arith(const std::vector<u64>& s0, const std::vector<u64>& s1,
                                   const FixedParams& p = {});

std::pair<BitVec, BitVec> share_bool(const BitVec& x, Prg& rng);
BitVec reconstruct_bool(const BitVec& s0, const BitVec& s1);

// Local operations on one party's share vector.
std::vector<u64> add_shares(const std::vector<u64>& a, const std::vector<u64>& b, const FixedParams& p = {});
std::vector<u64> sub_shares(const std::vector<u64>& a, const std::vector<u64>& b, const FixedParams& p = {});
std::vector<u64> scale_shares(const std::vector<u64>& a, u64 c, const FixedParams& p = {});
// Adds a public constant: only party 0 changes its share.
std::vector<u64> add_public(const std::vector<u64>& a, u64 c, int party, const FixedParams& p = {});
// Weighted sum of several share vectors with public ring coefficients.
std::vector<u64> local_linear(const std::vector<std::vector<u64>>& shares, const std::vector<u64>& coeffs,
                              const FixedParams& p = {});
BitVec xor_shares(const BitVec& a, const BitVec& b);
BitVec not_share(const BitVec& a, int party);

// Local probabilistic truncation by `shift` bits: party 0 shifts its share,
// party 1 shifts the negation of its share. Off by at most one ulp except
// with probability about |x| / 2^(ell-1).
u64 truncate_share(u64 s, int party, int shift, const FixedParams& p = {});
std::vector<u64> truncate_shares(const std::vector<u64>& s, int party, int shift, const FixedParams& p = {});

}  // namespace ag
