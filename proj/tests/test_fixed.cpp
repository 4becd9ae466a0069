#include <gtest/gtest.h>

#include <cmath>

#include "anongbdt/fixed.hpp"

using namespace ag;

TEST(Fixed, EncodeBasics) {
  EXPECT_EQ(encode_fixed(0.0), 0u);
  EXPECT_EQ(encode_fixed(1.0), 1048576u);
  EXPECT_EQ(decode_fixed(encode_fixed(-2.5)), -2.5);
  EXPECT_THROW(encode_fixed(std::ldexp(1.0, 44)), std::range_error);
  EXPECT_THROW(encode_fixed(NAN), std::range_error);
}

TEST(Fixed, RoundTripGrid) {
  Prg g(7);
  for (int i = 0; i < 10000; ++i) {
    double x = (g.uniform01() * 2 - 1) * 1000.0;
    double back = decode_fixed(encode_fixed(x));
    EXPECT_LE(std::fabs(back - x), std::ldexp(1.0, -21));
  }
  EXPECT_NEAR(decode_fixed(encode_fixed(5.6)), 5.6, std::ldexp(1.0, -21));
}

TEST(Fixed, OddSymmetricDecode) {
  Prg g(8);
  for (int i = 0; i < 10000; ++i) {
    double x = (g.uniform01() * 2 - 1) * 1e6;
    u64 e = encode_fixed(x);
    EXPECT_EQ(decode_fixed(0 - e), -decode_fixed(e));
  }
}

TEST(Fixed, ShareDefinition) {
  // share1 = r, share0 = x - r
  Prg g(1);
  u64 r = g.next();
  Prg g2(1);
  auto s = share_arith(0, g2);
  EXPECT_EQ(s.s1, r);
  EXPECT_EQ(s.s0, 0 - r);
  EXPECT_EQ(reconstruct_arith(s.s0, s.s1), 0u);
}

TEST(Fixed, ShareUniformChiSquare) {
  Prg g(3);
  const int bins = 64, draws = 100000;
  std::vector<int> cnt(bins, 0);
  for (int i = 0; i < draws; ++i) cnt[share_arith(12345, g).s1 >> 58]++;
  double chi = 0, e = double(draws) / bins;
  for (int c : cnt) chi += (c - e) * (c - e) / e;
  // 63 degrees of freedom: the 99.9% quantile is about 103.4.
  EXPECT_LT(chi, 103.4);
}

TEST(Fixed, LocalLinearProperty) {
  Prg g(4);
  for (int t = 0; t < 10000; ++t) {
    u64 x = g.next(), y = g.next(), c = g.next();
    auto sx = share_arith(x, g), sy = share_arith(y, g);
    auto r0 = local_linear({{sx.s0}, {sy.s0}}, {c, 3});
    auto r1 = local_linear({{sx.s1}, {sy.s1}}, {c, 3});
    EXPECT_EQ(r0[0] + r1[0], c * x + 3 * y);
  }
  std::vector<u64> a{5, 6};
  EXPECT_THROW(add_shares(a, {1}), std::invalid_argument);
  auto d = sub_shares(a, a);
  EXPECT_EQ(d[0], 0u);
}

TEST(Fixed, BooleanNot) {
  Prg g(5);
  BitVec x{0, 1, 1, 0};
  auto [a, b] = share_bool(x, g);
  auto na = not_share(a, 0), nb = not_share(b, 1);
  EXPECT_EQ(nb, b);
  auto r = reconstruct_bool(na, nb);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(r[i], x[i] ^ 1);
}

TEST(Fixed, TruncationWithinOneUlp) {
  Prg g(6);
  auto s = share_arith(encode_fixed(1.5) * encode_fixed(2.0), g);
  u64 t = truncate_share(s.s0, 0, 20) + truncate_share(s.s1, 1, 20);
  EXPECT_NEAR(decode_fixed(t), 3.0, std::ldexp(1.0, -20) * 1.01);
  auto z = share_arith(0, g);
  EXPECT_NEAR(decode_fixed(truncate_share(z.s0, 0, 20) + truncate_share(z.s1, 1, 20)), 0.0, std::ldexp(1.0, -20));
  double maxerr = 0;
  for (int i = 0; i < 10000; ++i) {
    double a = (g.uniform01() * 2 - 1) * 100, b = (g.uniform01() * 2 - 1) * 100;
    u64 pa = encode_fixed(a), pb = encode_fixed(b);
    long double exact = (long double)to_signed(pa) * (long double)to_signed(pb) / std::ldexp(1.0L, 40);
    auto sp = share_arith(pa * pb, g);
    u64 r = truncate_share(sp.s0, 0, 20) + truncate_share(sp.s1, 1, 20);
    maxerr = std::max<double>(maxerr, std::fabs((long double)decode_fixed(r) - exact));
  }
  EXPECT_LE(maxerr, 2 * std::ldexp(1.0, -20));
}
