#include <gtest/gtest.h>

#include <cmath>

#include "ergoinv/density.hpp"
#include "ergoinv/error.hpp"
#include "ergoinv/inversion.hpp"
#include "ergoinv/models.hpp"
#include "oracles.hpp"

using namespace ergoinv;

namespace {

DensityOptions lenient() {
  DensityOptions o;
  o.strict_tail = false;
  return o;
}

double max_error_1d(const InversionReport& r, const std::function<double(double)>& truth, double radius) {
  const auto& g = r.drift->grid;
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = g.coordinate(0, k);
    if (std::abs(x) > radius + 1e-12 || r.drift->mask[k]) continue;
    err = std::max(err, std::abs(r.drift->components[0][k] - truth(x)));
  }
  return err;
}

const VectorField kMinusX = [](std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i];
};

double cauchy_drift(double x) { return -2.0 * x / (1.0 + x * x); }

}  // namespace

TEST(InvertDrift1d, NormalWithUnitDiffusion) {
  const auto p = closed_form_density_1d(preset_pair("ou"), -8.0, 8.0, 16001);
  const auto r = invert_drift_1d(p, [](double) { return 1.0; });
  EXPECT_LE(max_error_1d(r, [](double x) { return -x; }, 5.0), 1e-4);
  EXPECT_EQ(r.target, InversionTarget::drift_1d);
}

TEST(InvertDrift1d, CauchyForBothGaugeMembers) {
  // Oracle: (p D)' / p for p = 1/(pi(1+x^2)) and D = 2 + x^2 by hand:
  // p D = (2 + x^2)/(pi(1+x^2)), (p D)' = -2x / (pi (1+x^2)^2), so (pD)'/p = -2x/(1+x^2).
  const auto by_hand = [](double x) {
    const auto pd = [](double y) { return oracle::cauchy_pdf(y) * (2.0 + y * y); };
    return oracle::derivative(pd, x) / oracle::cauchy_pdf(x);
  };
  for (double x : {-4.0, -0.3, 1.0, 4.5}) EXPECT_NEAR(by_hand(x), cauchy_drift(x), 1e-8);

  const auto p = closed_form_density_1d(preset_pair("cauchy_drift"), -8.0, 8.0, 16001, lenient());
  const auto r1 = invert_drift_1d(p, [](double) { return 1.0; });
  const auto r2 = invert_drift_1d(p, [](double x) { return 2.0 + x * x; });
  EXPECT_LE(max_error_1d(r1, cauchy_drift, 5.0), 1e-4);
  EXPECT_LE(max_error_1d(r2, cauchy_drift, 5.0), 1e-4);
}

TEST(InvertDrift1d, RejectsNonPositiveDiffusion) {
  const auto p = closed_form_density_1d(preset_pair("ou"), -8.0, 8.0, 801);
  EXPECT_THROW(invert_drift_1d(p, [](double x) { return x; }), Error);
}

TEST(InvertDriftLangevin, TwoDimensionalGaussian) {
  const auto p = gibbs_density([](auto x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }, 2.0, -6.0, 6.0, 241, 2);
  const auto r = invert_drift_langevin(p, 2.0);
  double err = 0.0;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    if (r.drift->mask[k]) continue;
    const auto x = p.grid.point(k);
    for (std::size_t a = 0; a < 2; ++a) err = std::max(err, std::abs(r.drift->components[a][k] + x[a]));
  }
  // ln p is quadratic, so the second-order differences are exact.
  EXPECT_LE(err, 1e-9);
}

TEST(InvertDriftLangevin, QuarticExponent) {
  // p ~ exp(-x^4/2) is the Gibbs density of U = -x^4/2 at beta = 2; drift U' = -2x^3.
  const auto p = gibbs_density([](auto x) { return -0.5 * std::pow(x[0], 4); }, 2.0, -3.0, 3.0, 6001, 1);
  const auto r = invert_drift_langevin(p, 2.0);
  const auto oracle_drift = [](double x) {
    return oracle::derivative([](double y) { return -0.5 * std::pow(y, 4); }, x);
  };
  EXPECT_LE(max_error_1d(r, oracle_drift, 2.5), 1e-4);
}

TEST(InvertDriftLangevin, ScaledBetaScalesDrift) {
  const auto g = GridSpec::uniform(1, -5.0, 5.0, 1001);
  const double c = 3.0;
  const auto p = gibbs_density([c](auto x) { return -0.5 * c * x[0] * x[0]; }, 2.0 * c, g);
  const auto base = invert_drift_langevin(p, 2.0);
  const auto scaled = invert_drift_langevin(p, 2.0 * c);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!base.drift->mask[k]) {
      EXPECT_NEAR(scaled.drift->components[0][k], c * base.drift->components[0][k], 1e-12);
    }
  }
}

TEST(InvertBetaAdditive, GaussianGivesTwo) {
  const auto p = gibbs_density([](auto x) { return -0.5 * x[0] * x[0]; }, 2.0, GridSpec::uniform(1, -8.0, 8.0, 32001));
  const auto r = invert_beta_additive(p, kMinusX);
  ASSERT_TRUE(r.beta.has_value());
  EXPECT_NEAR(*r.beta, 2.0, 1e-6);
  EXPECT_LE(r.dispersion, 1e-6);
  EXPECT_GE(r.admissible, kMinAdmissibleNodes);
  EXPECT_FALSE(r.statistical);
}

TEST(InvertBetaAdditive, QuarticLangevinGivesTwo) {
  const auto p = gibbs_density([](auto x) { return -0.25 * std::pow(x[0], 4); }, 2.0, GridSpec::uniform(1, -4.0, 4.0, 8001));
  const auto r = invert_beta_additive(p, [](auto x, auto out) { out[0] = -x[0] * x[0] * x[0]; });
  EXPECT_NEAR(*r.beta, 2.0, 1e-4);
}

TEST(InvertBetaAdditive, DoubledDriftDoublesBeta) {
  const auto p = gibbs_density([](auto x) { return -0.5 * x[0] * x[0]; }, 2.0, GridSpec::uniform(1, -8.0, 8.0, 16001));
  const auto r = invert_beta_additive(p, [](auto x, auto out) { out[0] = -2.0 * x[0]; });
  EXPECT_NEAR(*r.beta, 4.0, 1e-5);
}

TEST(InvertBetaLangevin, OneAndTwoDimensions) {
  const auto p1 = gibbs_density([](auto x) { return -0.5 * x[0] * x[0]; }, 2.0, GridSpec::uniform(1, -6.0, 6.0, 1201));
  EXPECT_NEAR(*invert_beta_langevin(p1, kMinusX).beta, 2.0, 1e-9);
  const auto p2 = gibbs_density([](auto x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }, 2.0, -6.0, 6.0, 121, 2);
  const auto r2 = invert_beta_langevin(p2, kMinusX);
  for (double b : r2.pointwise_estimates) ASSERT_NEAR(b, 2.0, 1e-10);
}

TEST(InvertBetaLangevin, QuarticExponent) {
  const auto p = gibbs_density([](auto x) { return -0.5 * std::pow(x[0], 4); }, 2.0, GridSpec::uniform(1, -3.0, 3.0, 6001));
  const auto r = invert_beta_langevin(p, [](auto x, auto out) { out[0] = -2.0 * x[0] * x[0] * x[0]; });
  EXPECT_NEAR(*r.beta, 2.0, 1e-5);
}

TEST(InvertBetaLangevin, MostlyMaskedGridIsInsufficientSupport) {
  const auto p = gibbs_density([](auto x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }, 2.0, -40.0, 40.0, 101, 2);
  try {
    invert_beta_langevin(p, kMinusX);
    FAIL() << "expected insufficient support";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_support);
  }
}

TEST(StatisticalInversion, KdeBetaWithBootstrap) {
  const auto em = oracle::iid_normal(200000, 1, 31);
  const auto r = statistical_inversion(
      em, GridSpec::uniform(1, -6.0, 6.0, 241),
      [](const DensityGrid& q) { return invert_beta_additive(q, kMinusX); }, 2, 8, 5);
  EXPECT_TRUE(r.statistical);
  ASSERT_TRUE(r.bootstrap_dispersion.has_value());
  EXPECT_GT(*r.bootstrap_dispersion, 0.0);
  EXPECT_NEAR(*r.beta, 2.0, 0.2);
}

TEST(Aggregation, MedianQuantileIqr) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_DOUBLE_EQ(quantile({0.0, 1.0, 2.0, 3.0, 4.0}, 0.25), 1.0);
  EXPECT_DOUBLE_EQ(iqr({0.0, 1.0, 2.0, 3.0, 4.0}), 2.0);
}

TEST(GaugeFamily, CauchyPairDerivedDiffusion) {
  const auto f = gauge_diffusion_family(cauchy_drift, [](double) { return 1.0; }, 0.0, 1.0);
  for (double x : {-7.0, -1.0, 0.0, 0.5, 3.0, 7.9}) EXPECT_NEAR(f.diffusion(x), 2.0 + x * x, 1e-9 * (2.0 + x * x));
  EXPECT_TRUE(f.certified);
  EXPECT_LE(f.certificate_gap, kGaugeCertificateTol);
  EXPECT_FALSE(f.growth_flag);
  EXPECT_NEAR(diffusion_1d(f.derived_pair(), 3.0), 11.0, 1e-9);
}

TEST(GaugeFamily, ZeroOffsetIsTheBaseDiffusion) {
  const auto f = gauge_diffusion_family(cauchy_drift, [](double x) { return 1.0 + 0.1 * x * x; }, 0.0, 0.0);
  for (double x : {-5.0, 0.0, 2.0}) EXPECT_DOUBLE_EQ(f.diffusion(x), 1.0 + 0.1 * x * x);
}

TEST(GaugeFamily, OuBaseGrowsTooFast) {
  const auto f = gauge_diffusion_family([](double x) { return -x; }, [](double) { return 1.0; }, 0.0, 1.0);
  // U2 = -x^2 / 2, so D1 = 1 + exp(x^2 / 2).
  for (double x : {0.0, 1.0, 2.5}) EXPECT_NEAR(f.diffusion(x), 1.0 + std::exp(0.5 * x * x), 1e-8 * f.diffusion(x));
  EXPECT_TRUE(f.growth_flag);
  EXPECT_GT(f.growth_exponent, kGaugeGrowthLimit);
}

TEST(GaugeFamily, EllipticityGuard) {
  for (double offset : {-1.0, -2.0, -0.5}) {
    try {
      gauge_diffusion_family(cauchy_drift, [](double) { return 1.0; }, 0.0, offset);
      FAIL() << "offset " << offset;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_family);
    }
  }
}

TEST(SkewFamily, RotationOfTheGaussian) {
  Eigen::MatrixXd j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  const auto b2 = skew_drift_family(preset_pair("gaussian_2d"), j);
  const std::vector<double> x{0.7, -1.2};
  const auto b = b2.drift(x);
  EXPECT_NEAR(b[0], -x[0] + x[1], 1e-12);
  EXPECT_NEAR(b[1], -x[1] - x[0], 1e-12);
  EXPECT_NEAR(b2.sigma_matrix(x)(0, 0), std::sqrt(2.0), 1e-15);
}

TEST(SkewFamily, ZeroPerturbationAndRejections) {
  const auto base = preset_pair("gaussian_2d");
  const auto same = skew_drift_family(base, Eigen::MatrixXd::Zero(2, 2));
  const std::vector<double> x{0.3, 0.9};
  EXPECT_EQ(same.drift(x), base.drift(x));
  Eigen::MatrixXd sym(2, 2);
  sym << 0.0, 1.0, 1.0, 0.0;
  EXPECT_THROW(skew_drift_family(base, sym), Error);
  EXPECT_THROW(skew_drift_family(preset_pair("ou"), Eigen::MatrixXd::Zero(1, 1)), Error);
  EXPECT_THROW(skew_drift_family(preset_pair("skew_gaussian_2d"), Eigen::MatrixXd::Zero(2, 2)), Error);
}

TEST(SkewFamily, SkewFluxIsDivergenceFreeToSecondOrder) {
  const std::vector<double> upper{1.0, -0.5, 2.0};
  Eigen::MatrixXd j = skew_from_upper(3, upper);
  auto max_div = [&](std::size_t n) {
    const auto p = gibbs_density(
        [](auto x) { return -0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1] + 0.5 * x[2] * x[2]) + 0.2 * x[0] * x[1]; }, 2.0,
        -3.0, 3.0, n, 3, lenient());
    const VectorField zero = [](auto, auto out) { std::fill(out.begin(), out.end(), 0.0); };
    // skew_drift_field with zero drift is -J grad ln p; times p it is -J grad p.
    auto v = skew_drift_field(p, zero, j);
    for (auto& comp : v.components) {
      for (std::size_t k = 0; k < comp.size(); ++k) comp[k] *= p.values[k];
    }
    const auto div = divergence(v);
    double m = 0.0;
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
      if (p.grid.is_interior(k, 2)) m = std::max(m, std::abs(div.values[k]));
    }
    return m;
  };
  const double coarse = max_div(31), fine = max_div(61);
  EXPECT_LT(fine, 1e-3);
  EXPECT_NEAR(std::log2(coarse / fine), 2.0, 0.3);
}

TEST(SkewFamily, SkewPairIsStationaryForTheGaussian) {
  Eigen::MatrixXd j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  const auto pair = skew_drift_family(preset_pair("gaussian_2d"), j);
  // The probes are compactly supported bumps; Simpson needs h ~ 0.025 to
  // resolve them to 1e-6.
  const auto p = gibbs_density([](auto x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }, 2.0, -7.0, 7.0, 561, 2);
  EXPECT_LE(fp_residual(p, pair).weak_form_max(), 1e-6);
}

TEST(Nonidentifiability, DifferentVariancesAreDistinguishable) {
  const auto a = preset_pair("ou");
  const auto b = make_additive(1, 1, [](auto x, auto out) { out[0] = -2.0 * x[0]; }, Eigen::MatrixXd::Constant(1, 1, std::sqrt(2.0)));
  SimConfig cfg;
  cfg.n_chains = 8;
  cfg.n_steps = 100000;
  cfg.thinning = 10;
  const auto rep = verify_nonidentifiability(a, b, cfg);
  EXPECT_EQ(rep.verdict, "distinguishable");
  EXPECT_GT(rep.distance.ks, rep.threshold);
  const auto j = to_json(rep);
  EXPECT_EQ(j.at("verdict"), "distinguishable");
}

TEST(Nonidentifiability, DegenerateNoiseIsAPreconditionError) {
  const auto a = preset_pair("ou");
  const auto b = make_general(1, 1, [](auto x, auto out) { out[0] = -x[0]; }, [](auto, auto out) { out[0] = 0.0; });
  SimConfig cfg;
  cfg.n_chains = 2;
  cfg.n_steps = 1000;
  try {
    verify_nonidentifiability(a, b, cfg);
    FAIL() << "expected a precondition error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(InversionReport, JsonFields) {
  const auto p = gibbs_density([](auto x) { return -0.5 * x[0] * x[0]; }, 2.0, GridSpec::uniform(1, -8.0, 8.0, 1601));
  const auto j = to_json(invert_beta_additive(p, kMinusX));
  for (const char* key : {"target", "formula_id", "aggregation", "dispersion", "masked_fraction", "admissible",
                          "thresholds", "statistical", "warnings"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.at("target"), "beta_additive");
}
