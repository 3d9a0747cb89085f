#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ergoinv/error.hpp"
#include "ergoinv/grid.hpp"

using namespace ergoinv;

TEST(Simpson, ExactForCubics) {
  const auto g = GridSpec::uniform(1, -1.0, 2.0, 9);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(0, i);
    f[i] = 3.0 * x * x * x - x * x + 0.5;
  }
  // int_{-1}^{2} (3x^3 - x^2 + 1/2) dx = 3 (16 - 1)/4 - (8 + 1)/3 + 3/2
  EXPECT_NEAR(integrate(g, f), 45.0 / 4.0 - 3.0 + 1.5, 1e-13);
}

TEST(Simpson, FourthOrderOnSine) {
  const auto coarse = GridSpec::uniform(1, 0.0, std::numbers::pi, 21);
  const auto fine = GridSpec::uniform(1, 0.0, std::numbers::pi, 41);
  auto err = [](const GridSpec& g) {
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(g.coordinate(0, i));
    return std::abs(integrate(g, f) - 2.0);
  };
  EXPECT_NEAR(std::log2(err(coarse) / err(fine)), 4.0, 0.05);
}

TEST(GridSpec, RejectsEvenAndTinyNodeCounts) {
  EXPECT_THROW(GridSpec::uniform(1, 0.0, 1.0, 10), Error);
  EXPECT_THROW(GridSpec::uniform(1, 0.0, 1.0, 7), Error);
  EXPECT_THROW(GridSpec(Box{{0.0}, {0.0}}, {9}), Error);
}

TEST(GridSpec, RowMajorLastAxisFastest) {
  const GridSpec g(Box{{0.0, 10.0}, {8.0, 18.0}}, {9, 11});
  EXPECT_EQ(g.size(), 99u);
  EXPECT_EQ(g.stride(1), 1u);
  EXPECT_EQ(g.stride(0), 11u);
  const auto p = g.point(1);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 10.8);
  EXPECT_EQ(g.axis_index(23, 0), 2u);
  EXPECT_EQ(g.axis_index(23, 1), 1u);
}

TEST(GridSpec, InteriorMargin) {
  const auto g = GridSpec::uniform(2, -1.0, 1.0, 9);
  EXPECT_FALSE(g.is_interior(0, 1));
  EXPECT_TRUE(g.is_interior(4 * 9 + 4, 4));
  EXPECT_FALSE(g.is_interior(4 * 9 + 4, 5));
}

TEST(Differences, ExactOnQuadraticsIncludingBoundaries) {
  const auto g = GridSpec::uniform(1, -2.0, 3.0, 11);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(0, i);
    f[i] = 2.0 * x * x - 3.0 * x + 1.0;
  }
  const auto d1 = differentiate(g, f, 0, Exec::serial);
  const auto d2 = differentiate2(g, f, 0, Exec::serial);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(d1[i], 4.0 * g.coordinate(0, i) - 3.0, 1e-11);
    EXPECT_NEAR(d2[i], 4.0, 1e-10);
  }
}

TEST(Differences, SecondOrderConvergence) {
  auto err = [](std::size_t n) {
    const auto g = GridSpec::uniform(1, 0.0, 1.0, n);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(g.coordinate(0, i));
    const auto d = differentiate(g, f, 0, Exec::serial);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(d[i] - f[i]));
    return e;
  };
  EXPECT_NEAR(std::log2(err(101) / err(201)), 2.0, 0.1);
}

TEST(Differences, ParallelMatchesSerial) {
  const auto g = GridSpec::uniform(2, -1.0, 1.0, 65);
  std::vector<double> f(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto p = g.point(k);
    f[k] = std::sin(3.0 * p[0]) * std::cos(2.0 * p[1]);
  }
  for (std::size_t a = 0; a < 2; ++a) {
    EXPECT_EQ(differentiate(g, f, a, Exec::serial), differentiate(g, f, a, Exec::parallel));
    EXPECT_EQ(differentiate2(g, f, a, Exec::serial), differentiate2(g, f, a, Exec::parallel));
  }
}
