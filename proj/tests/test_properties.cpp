#include <gtest/gtest.h>

#include <cmath>

#include "ergoinv/density.hpp"
#include "ergoinv/error.hpp"
#include "ergoinv/inversion.hpp"
#include "ergoinv/models.hpp"
#include "ergoinv/simulate.hpp"
#include "oracles.hpp"

// Invariants checked over a fixed family of inputs rather than single cases.

using namespace ergoinv;

namespace {

DensityOptions lenient() {
  DensityOptions o;
  o.strict_tail = false;
  return o;
}

double cauchy_drift(double x) { return -2.0 * x / (1.0 + x * x); }

}  // namespace

// Every member D_c = D0 + c / p of the gauge family shares the stationary law.
class GaugeInvariance : public ::testing::TestWithParam<double> {};

TEST_P(GaugeInvariance, MembersShareTheDensity) {
  const double offset = GetParam();
  const auto family = gauge_diffusion_family(cauchy_drift, [](double) { return 1.0; }, 0.0, offset);
  EXPECT_TRUE(family.certified);
  const auto base = closed_form_density_1d(family.base_pair(), -8.0, 8.0, 4001, lenient());
  const auto derived = closed_form_density_1d(family.derived_pair(), -8.0, 8.0, 4001, lenient());
  for (std::size_t i = 0; i < base.grid.size(); ++i) ASSERT_NEAR(base.values[i], derived.values[i], 1e-8);
  EXPECT_LE(fp_residual(base, family.derived_pair()).weak_form_max(), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Offsets, GaugeInvariance, ::testing::Values(0.0, 0.25, 1.0, 3.0, 10.0));

// b2 = b1 - J grad ln p leaves the Gibbs density stationary for any skew J.
class SkewStationarity : public ::testing::TestWithParam<double> {};

TEST_P(SkewStationarity, WeakResidualVanishes) {
  Eigen::MatrixXd j(2, 2);
  j << 0.0, GetParam(), -GetParam(), 0.0;
  const ScalarField u = [](std::span<const double> x) {
    return -0.25 * std::pow(x[0], 4) - 0.5 * x[1] * x[1] + 0.3 * x[0] * x[1];
  };
  const VectorField grad = [](std::span<const double> x, std::span<double> out) {
    out[0] = -std::pow(x[0], 3) + 0.3 * x[1];
    out[1] = -x[1] + 0.3 * x[0];
  };
  const auto pair = skew_drift_family(make_langevin(2, u, grad, 2.0), j);
  const auto p = gibbs_density(u, 2.0, -6.0, 6.0, 601, 2);
  EXPECT_LE(fp_residual(p, pair).weak_form_max(), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Strengths, SkewStationarity, ::testing::Values(-2.0, 0.5, 1.0, 4.0));

// Stationary densities are nonnegative and integrate to one on the grid.
class DensityBasics : public ::testing::TestWithParam<const char*> {};

TEST_P(DensityBasics, NonnegativeWithUnitMass) {
  const auto pair = preset_pair(GetParam());
  const auto p = pair.dim() == 1 ? closed_form_density_1d(pair, -10.0, 10.0, 2001, lenient())
                                 : gibbs_density(pair.potential_field(), *pair.beta(), -6.0, 6.0,
                                                 121, pair.dim());
  double mass = 0.0;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    ASSERT_GE(p.values[k], 0.0);
    mass += p.grid.quadrature_weight(k) * p.values[k];
  }
  EXPECT_NEAR(mass, 1.0, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Presets, DensityBasics,
                         ::testing::Values("ou", "cauchy_drift", "cauchy_gauge", "quartic", "double_well",
                                           "gaussian_2d"));

// Drift inversion from the closed-form density returns the model drift.
struct PolyCase {
  std::vector<double> a;
  double c;
};

class DriftRoundTrip : public ::testing::TestWithParam<PolyCase> {};

TEST_P(DriftRoundTrip, RecoversPolynomialDrift) {
  const auto& pc = GetParam();
  const std::vector<double> cs{pc.c};
  const auto pair = polynomial_pair(pc.a, cs);
  const auto p = closed_form_density_1d(pair, -4.0, 4.0, 16001);
  const double d = 0.5 * pc.c * pc.c;
  const auto r = invert_drift_1d(p, [d](double) { return d; });
  double err = 0.0;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    const double x = p.grid.coordinate(0, k);
    if (std::abs(x) > 2.0 || r.drift->mask[k]) continue;
    const std::vector<double> xs{x};
    err = std::max(err, std::abs(r.drift->components[0][k] - pair.drift(xs)[0]));
  }
  EXPECT_LE(err, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Polynomials, DriftRoundTrip,
                         ::testing::Values(PolyCase{{0.0, -1.0}, 1.0}, PolyCase{{1.0, -2.0, 0.0, -1.0}, 1.0},
                                           PolyCase{{0.0, 0.0, 0.0, -1.0}, 1.5},
                                           PolyCase{{0.5, 1.0, 0.0, -1.0}, 0.8}));

// Scaling U by c and beta by c leaves p unchanged; the drift inverted from p
// then scales by c, and so does beta recovered against the scaled drift.
class ScaleDegeneracy : public ::testing::TestWithParam<double> {};

TEST_P(ScaleDegeneracy, BetaScalesWithDrift) {
  const double c = GetParam();
  const auto p = gibbs_density([](auto x) { return -0.5 * x[0] * x[0]; }, 2.0, GridSpec::uniform(1, -6.0, 6.0, 1201));
  const auto q = gibbs_density([c](auto x) { return -0.5 * c * x[0] * x[0]; }, 2.0 * c, GridSpec::uniform(1, -6.0, 6.0, 1201));
  for (std::size_t k = 0; k < p.grid.size(); ++k) ASSERT_NEAR(p.values[k], q.values[k], 1e-12);
  const auto r = invert_beta_langevin(p, [c](auto x, auto out) { out[0] = -c * x[0]; });
  EXPECT_NEAR(*r.beta, 2.0 * c, 1e-8 * c);
}

INSTANTIATE_TEST_SUITE_P(Factors, ScaleDegeneracy, ::testing::Values(0.25, 1.0, 3.0, 7.5));

// Output does not depend on the execution policy.
class ExecInvariance : public ::testing::TestWithParam<const char*> {};

TEST_P(ExecInvariance, SamplesAndKdeAgree) {
  const auto pair = preset_pair(GetParam());
  SimConfig cfg;
  cfg.n_steps = 3000;
  cfg.n_chains = 3;
  cfg.thinning = 3;
  const auto a = sample_invariant(pair, cfg, Exec::parallel);
  const auto b = sample_invariant(pair, cfg, Exec::serial);
  ASSERT_EQ(a.samples, b.samples);
  const auto g = GridSpec::uniform(pair.dim(), -4.0, 4.0, pair.dim() == 1 ? 201 : 41);
  const auto ka = kde_density(a, g, Exec::parallel);
  const auto kb = kde_density(a, g, Exec::serial);
  ASSERT_EQ(ka.density.values, kb.density.values);
  for (double v : ka.density.values) ASSERT_GE(v, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Presets, ExecInvariance, ::testing::Values("ou", "cauchy_gauge", "double_well", "skew_gaussian_2d"));

// KS and W1 are symmetric and vanish on identical samples.
TEST(DistanceProperties, SymmetryAndIdentity) {
  const auto a = oracle::iid_normal(4000, 1, 1).axis(0);
  const auto b = oracle::iid_cauchy(3000, 2).axis(0);
  EXPECT_EQ(ks_two_sample(a, b), ks_two_sample(b, a));
  EXPECT_NEAR(wasserstein1(a, b), wasserstein1(b, a), 1e-12);
  EXPECT_EQ(ks_two_sample(a, a), 0.0);
  EXPECT_EQ(wasserstein1(a, a), 0.0);
  const double ks = ks_two_sample(a, b);
  EXPECT_GE(ks, 0.0);
  EXPECT_LE(ks, 1.0);
}
