#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "ergoinv/rng.hpp"
#include "oracles.hpp"

using namespace ergoinv;

// Known-answer vectors of Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswerZeros) {
  const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto r = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, DrawIsPureFunctionOfCounter) {
  const CounterRng a(42), b(42);
  std::vector<double> x(5), y(5);
  a.normals(Stream::increments, 1234, 7, x);
  b.normals(Stream::increments, 1234, 7, y);
  EXPECT_EQ(x, y);
  b.normals(Stream::increments, 1234, 8, y);
  EXPECT_NE(x, y);
  b.normals(Stream::initial_state, 1234, 7, y);
  EXPECT_NE(x, y);
  CounterRng(43).normals(Stream::increments, 1234, 7, y);
  EXPECT_NE(x, y);
}

TEST(CounterRng, SeedRoundTrip) {
  EXPECT_EQ(CounterRng(0x0123456789abcdefull).seed(), 0x0123456789abcdefull);
}

TEST(CounterRng, UniformsInOpenInterval) {
  EXPECT_GT(CounterRng::to_unit(0, 0), 0.0);
  EXPECT_LT(CounterRng::to_unit(0xffffffffu, 0xffffffffu), 1.0);
}

TEST(CounterRng, NormalMoments) {
  const CounterRng rng(7);
  std::vector<double> v;
  std::vector<double> z(4);
  for (std::uint64_t n = 0; n < 50000; ++n) {
    rng.normals(Stream::increments, n, 0, z);
    v.insert(v.end(), z.begin(), z.end());
  }
  // 2e5 draws: standard error of the mean 0.0022, of the variance 0.0032.
  EXPECT_NEAR(oracle::mean(v), 0.0, 0.01);
  EXPECT_NEAR(oracle::variance(v), 1.0, 0.015);
  EXPECT_NEAR(oracle::empirical_quantile(v, 0.975), 1.959964, 0.03);
}

TEST(CounterRng, DeriveSeedSeparatesLabels) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t label = 0; label < 64; ++label) seen.insert(derive_seed(20240917ull, label));
  EXPECT_EQ(seen.size(), 64u);
}
