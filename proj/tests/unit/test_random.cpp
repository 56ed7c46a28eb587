#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lss/random.hpp"

namespace {

TEST(Philox, KnownAnswerZero) {
  const auto r = lss::philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r[0], 0x6627e8d5u);
  EXPECT_EQ(r[1], 0xe169c58du);
  EXPECT_EQ(r[2], 0xbc57ac4cu);
  EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto r = lss::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r[0], 0x408f276du);
  EXPECT_EQ(r[1], 0x41c83b0eu);
  EXPECT_EQ(r[2], 0xa20bc7c6u);
  EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto r = lss::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r[0], 0xd16cfe09u);
  EXPECT_EQ(r[1], 0x94fdccebu);
  EXPECT_EQ(r[2], 0x5001e420u);
  EXPECT_EQ(r[3], 0x24126ea1u);
}

TEST(NoiseKey, PureFunctionOfCounter) {
  const lss::NoiseKey k(42, 3);
  const double late = k.normal(1000, 5);
  for (int i = 0; i < 10; ++i) (void)k.normal(static_cast<std::uint64_t>(i), 0);
  EXPECT_EQ(late, lss::NoiseKey(42, 3).normal(1000, 5));
  EXPECT_NE(k.normal(1000, 5), lss::NoiseKey(42, 4).normal(1000, 5));
  EXPECT_NE(k.normal(1000, 5), lss::NoiseKey(43, 3).normal(1000, 5));
}

TEST(NoiseKey, BatchMatchesSingleDraws) {
  const lss::NoiseKey k(7, 0);
  std::vector<double> out(5);
  k.normals(11, out);
  for (std::uint32_t i = 0; i < 5; ++i) EXPECT_EQ(out[i], k.normal(11, i));
}

TEST(NoiseKey, Moments) {
  const lss::NoiseKey k(2024, 1);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0, umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double z = k.normal(static_cast<std::uint64_t>(i), 0);
    const double u = k.uniform(static_cast<std::uint64_t>(i), 1);
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 5.0 * std::sqrt(96.0 / n));
  EXPECT_GT(umin, 0.0);
  EXPECT_LT(umax, 1.0);
}

TEST(Unit, OpenInterval) {
  EXPECT_GT(lss::bits_to_open_unit(0), 0.0);
  EXPECT_LT(lss::bits_to_open_unit(~std::uint64_t{0}), 1.0);
  EXPECT_NEAR(lss::normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_DOUBLE_EQ(lss::normal_quantile(0.5), 0.0);
}

}  // namespace
