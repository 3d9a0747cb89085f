#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ergoinv/density.hpp"
#include "ergoinv/error.hpp"
#include "ergoinv/models.hpp"
#include "oracles.hpp"

using namespace ergoinv;

namespace {

DensityOptions lenient() {
  DensityOptions o;
  o.strict_tail = false;
  return o;
}

double quartic(std::span<const double> x) { return -0.25 * x[0] * x[0] * x[0] * x[0]; }

}  // namespace

TEST(ClosedForm, OrnsteinUhlenbeckIsStandardNormal) {
  const auto p = closed_form_density_1d(preset_pair("ou"), -8.0, 8.0, 4001);
  double err = 0.0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    err = std::max(err, std::abs(p.values[i] - oracle::normal_pdf(p.grid.coordinate(0, i))));
  }
  EXPECT_LE(err, 1e-8);
  EXPECT_NEAR(p.mass, 1.0, 1e-12);
  EXPECT_LT(p.tail_mass, 1e-12);
}

TEST(ClosedForm, CauchyShapeForBothGaugeMembers) {
  const double L = 20.0;
  const auto a = closed_form_density_1d(preset_pair("cauchy_drift"), -L, L, 4001, lenient());
  const auto b = closed_form_density_1d(preset_pair("cauchy_gauge"), -L, L, 4001, lenient());
  // Normalized on the box: p = 1 / ((1 + x^2) * 2 atan(L)).
  const double z_box = 2.0 * std::atan(L);
  double err = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const double x = a.grid.coordinate(0, i);
    err = std::max(err, std::abs(a.values[i] - 1.0 / ((1.0 + x * x) * z_box)));
    gap = std::max(gap, std::abs(a.values[i] - b.values[i]));
  }
  EXPECT_LE(err, 1e-9);
  EXPECT_LE(gap, 1e-9);
  // Exact mass outside the box relative to the mass inside.
  const double outside = (std::numbers::pi - z_box) / z_box;
  EXPECT_NEAR(a.tail_mass, outside, 0.1 * outside);
  EXPECT_THROW(closed_form_density_1d(preset_pair("cauchy_drift"), -L, L, 4001), TruncationError);
}

TEST(ClosedForm, RejectsNonPositiveDiffusion) {
  const auto p = make_general(
      1, 1, [](auto x, auto out) { out[0] = -x[0]; }, [](auto x, auto out) { out[0] = x[0]; });
  EXPECT_THROW(closed_form_density_1d(p, -1.0, 1.0, 101), Error);
}

TEST(Normalization, CauchyOnWideBoxIsHeavy) {
  const auto g = GridSpec::uniform(1, -200.0, 200.0, 40001);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = 1.0 / (1.0 + std::pow(g.coordinate(0, i), 2));
  const auto r = normalization_constant(g, v);
  EXPECT_NEAR(r.z, std::numbers::pi, 0.01 * std::numbers::pi);
  EXPECT_TRUE(r.heavy_tail);
  EXPECT_FALSE(r.divergent);
  // Extrapolated tail close to the exact 2 / 200 beyond the box.
  EXPECT_NEAR(r.z + r.tail_estimate, std::numbers::pi, 2e-4);
}

TEST(Normalization, GaussianIntegral) {
  const auto g = GridSpec::uniform(1, -8.0, 8.0, 4001);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::exp(-0.5 * std::pow(g.coordinate(0, i), 2));
  const auto r = normalization_constant(g, v);
  EXPECT_NEAR(r.z, std::sqrt(2.0 * std::numbers::pi), 1e-10);
  EXPECT_FALSE(r.heavy_tail);
}

TEST(Normalization, ConstantIsFlaggedDivergent) {
  for (double L : {10.0, 100.0, 1000.0}) {
    const auto g = GridSpec::uniform(1, -L, L, 201);
    const auto r = normalization_constant(g, std::vector<double>(g.size(), 1.0));
    EXPECT_TRUE(r.divergent) << L;
    EXPECT_FALSE(r.warnings.empty());
  }
}

TEST(Gibbs, TwoDimensionalGaussian) {
  const auto p = gibbs_density([](auto x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }, 2.0, -7.0, 7.0, 281, 2);
  double err = 0.0;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    const auto x = p.grid.point(k);
    err = std::max(err, std::abs(p.values[k] - oracle::normal_pdf(x[0]) * oracle::normal_pdf(x[1])));
  }
  EXPECT_LE(err, 1e-8);
}

TEST(Gibbs, QuarticPartitionFunction) {
  const auto p = gibbs_density(quartic, 2.0, -6.0, 6.0, 2401, 1);
  const double z_oracle = oracle::trapezoid([](double x) { return std::exp(-0.25 * x * x * x * x); }, -6.0, 6.0, 200000);
  const double z_closed = std::sqrt(2.0) * std::tgamma(0.25) / 2.0;
  EXPECT_NEAR(z_oracle, z_closed, 1e-9);
  EXPECT_NEAR(std::exp(p.log_normalizer), z_closed, 1e-9);
  EXPECT_NEAR(z_closed, 2.56369, 1e-5);
}

TEST(Gibbs, ScaleDegeneracyNodewise) {
  const auto g = GridSpec::uniform(1, -5.0, 5.0, 1001);
  const auto base = gibbs_density(quartic, 2.0, g);
  for (double c : {0.5, 2.0, 10.0}) {
    const auto s = gibbs_density([c](auto x) { return c * quartic(x); }, 2.0 * c, g);
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_NEAR(s.values[k], base.values[k], 1e-12);
  }
}

TEST(Operators, GradLogOfNormalIsExact) {
  // ln p is quadratic, so central differences reproduce -x to round-off.
  const auto p = closed_form_density_1d(preset_pair("ou"), -8.0, 8.0, 801);
  const auto g = grad_log(p);
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double x = p.grid.coordinate(0, i);
    if (!g.mask[i] && std::abs(x) <= 5.0) {
      ASSERT_NEAR(g.components[0][i], -x, 1e-10);
    }
  }
}

TEST(Operators, GradLogIsSecondOrder) {
  double prev = 0.0;
  for (std::size_t n : {401u, 801u}) {
    const auto p = gibbs_density(quartic, 2.0, -4.0, 4.0, n, 1);
    const auto g = grad_log(p);
    double err = 0.0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      const double x = p.grid.coordinate(0, i);
      if (!g.mask[i] && std::abs(x) <= 3.0) err = std::max(err, std::abs(g.components[0][i] + x * x * x));
    }
    if (prev > 0.0) {
      EXPECT_NEAR(std::log2(prev / err), 2.0, 0.1);
    }
    prev = err;
  }
}

TEST(Operators, CauchyLaplacianAtOrigin) {
  const double L = 50.0;
  const auto p = closed_form_density_1d(preset_pair("cauchy_drift"), -L, L, 20001, lenient());
  const auto lap = laplacian(p);
  // p'' (0) of 1/(pi (1 + x^2)) is -2/pi; the box normalization rescales by pi / (2 atan L).
  const double target = -2.0 / std::numbers::pi * std::numbers::pi / (2.0 * std::atan(L));
  const double h = p.grid.spacing(0);
  EXPECT_NEAR(lap.values[10000], target, 5.0 * h * h);
  EXPECT_NEAR(-2.0 / std::numbers::pi, oracle::derivative([](double x) { return oracle::derivative(oracle::cauchy_pdf, x); }, 0.0),
              1e-5);
}

TEST(Operators, DivergenceOfConstantFieldVanishes) {
  VectorGridField v(GridSpec::uniform(2, -1.0, 1.0, 33));
  v.components = {std::vector<double>(v.grid.size(), 3.0), std::vector<double>(v.grid.size(), -1.5)};
  const auto d = divergence(v);
  for (double x : d.values) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(Residual, OuStrongAndWeak) {
  const auto p = closed_form_density_1d(preset_pair("ou"), -8.0, 8.0, 4001);
  const auto r = fp_residual(p, preset_pair("ou"));
  EXPECT_LE(r.linf, 5e-6);
  EXPECT_LE(r.weak_form_max(), 1e-6);
  EXPECT_EQ(r.weak_form_values.size(), 8u);
}

TEST(Residual, CauchyGaugePairWeakForm) {
  const auto pair = preset_pair("cauchy_gauge");
  const auto p = closed_form_density_1d(pair, -10.0, 10.0, 4001, lenient());
  EXPECT_LE(fp_residual(p, pair).weak_form_max(), 1e-6);
}

TEST(Residual, MismatchedPairIsClearlyNonzero) {
  const auto p = closed_form_density_1d(preset_pair("cauchy_drift"), -10.0, 10.0, 4001, lenient());
  const auto r = fp_residual(p, preset_pair("ou"));
  EXPECT_GT(r.linf, 0.05);
  EXPECT_GT(r.weak_form_max(), 1e-3);
}

TEST(Residual, ParallelMatchesSerial) {
  const auto pair = preset_pair("cauchy_gauge");
  const auto p = closed_form_density_1d(pair, -10.0, 10.0, 2001, lenient());
  const auto a = fp_residual(p, pair, 2, Exec::serial);
  const auto b = fp_residual(p, pair, 2, Exec::parallel);
  EXPECT_EQ(a.linf, b.linf);
  EXPECT_EQ(a.weak_form_max(), b.weak_form_max());
}

TEST(Primitive, IntegratesCosine) {
  const Primitive1D f([](double x) { return std::cos(x); }, 0.5, -3.0, 3.0, 1e-2);
  for (double x : {-2.9, -1.0, 0.5, 0.77, 2.5}) EXPECT_NEAR(f(x), std::sin(x) - std::sin(0.5), 1e-9);
}

TEST(Serialization, DensityRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "ergoinv_density_io";
  std::filesystem::create_directories(dir);
  const auto p = gibbs_density([](auto x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }, 2.0, -8.0, 8.0, 81, 2);
  write_density_csv(dir / "p.csv", p);
  write_density_json(dir / "p.json", p);
  const auto q = read_density(dir / "p.csv", dir / "p.json");
  EXPECT_EQ(q.grid, p.grid);
  for (std::size_t k = 0; k < p.grid.size(); ++k) EXPECT_NEAR(q.values[k], p.values[k], 1e-15 * (1.0 + p.values[k]));
  std::filesystem::remove_all(dir);
}
