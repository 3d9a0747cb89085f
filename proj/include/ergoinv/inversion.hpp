#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergoinv/density.hpp"
#include "ergoinv/grid.hpp"
#include "ergoinv/models.hpp"
#include "ergoinv/simulate.hpp"

namespace ergoinv {

using Function1D = std::function<double(double)>;

// Admissibility threshold for quotients, relative to the field maximum.
inline constexpr double kAdmissibleRelative = 1e-6;
inline constexpr std::size_t kMinAdmissibleNodes = 100;
inline constexpr std::size_t kBootstrapResamples = 16;

enum class InversionTarget { drift_1d, drift_langevin, beta_additive, beta_langevin, beta_spde };
const char* to_string(InversionTarget target) noexcept;

struct InversionReport {
  InversionTarget target = InversionTarget::drift_1d;
  std::string formula_id;
  // Scalar targets: the aggregated beta. Field targets: the recovered drift.
  std::optional<double> beta;
  std::optional<VectorGridField> drift;
  std::vector<double> pointwise_estimates;  // scalar targets, before aggregation
  std::string aggregation = "median";
  double dispersion = 0.0;                  // IQR of pointwise estimates
  double masked_fraction = 0.0;
  std::size_t admissible = 0;
  std::map<std::string, double> thresholds;
  bool statistical = false;
  std::optional<double> bootstrap_dispersion;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const InversionReport& report);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);
// Interquartile range.
double iqr(std::vector<double> values);

// b = D (ln(p D))' on unmasked nodes of a 1D density.
InversionReport invert_drift_1d(const DensityGrid& p, const Function1D& diffusion,
                                Exec exec = Exec::parallel);
// b = (beta / 2) grad ln p.
InversionReport invert_drift_langevin(const DensityGrid& p, double beta, Exec exec = Exec::parallel);
// beta(x) = 2 div(b p) / lap p on nodes with |lap p| > eps max|lap p|; median.
InversionReport invert_beta_additive(const DensityGrid& p, const VectorField& drift,
                                     double eps = kAdmissibleRelative, Exec exec = Exec::parallel);
// beta_i(x) = 2 b_i / d_i ln p over axes and nodes with |d_i ln p| > eps max|d_i ln p|; median.
InversionReport invert_beta_langevin(const DensityGrid& p, const VectorField& drift,
                                     double eps = kAdmissibleRelative, Exec exec = Exec::parallel);

// Runs a scalar inversion on the KDE of `em` and on `resamples` bootstrap
// resamples (same bandwidth); marks the report statistical and records the
// standard deviation of the resampled estimates. The bandwidth uses the rate
// for the highest density derivative the inversion formula takes.
InversionReport statistical_inversion(
    const EmpiricalMeasure& em, const GridSpec& grid,
    const std::function<InversionReport(const DensityGrid&)>& invert, std::size_t derivative_order,
    std::size_t resamples = kBootstrapResamples, std::uint64_t seed = kDefaultSeed,
    Exec exec = Exec::parallel);

// ---- non-identifiability families -------------------------------------------------

// D1 = D2 (1 + C e^{-U2}) with U2 the primitive of b / D2 anchored at x0 and
// C = offset e^{U2(x0)} / D2(x0). Every member shares the invariant density of (b, D2).
struct GaugeFamily {
  Function1D drift;
  Function1D base_diffusion;  // D2
  Function1D diffusion;       // D1
  double anchor = 0.0;
  double offset = 0.0;
  double constant = 0.0;      // C
  Box domain;
  double certificate_gap = 0.0;  // max nodewise |p(b, D1) - p(b, D2)|
  bool certified = false;
  double growth_exponent = 0.0;  // log2 D1(L) / D1(L/2) over the domain edge
  bool growth_flag = false;
  std::vector<std::string> warnings;

  // sigma = sqrt(2 D) for the base (member 2) or derived (member 1) diffusion.
  CoefficientPair base_pair(const std::string& name = "gauge_base") const;
  CoefficientPair derived_pair(const std::string& name = "gauge_derived") const;
};

inline constexpr double kGaugeCertificateTol = 1e-8;
inline constexpr double kGaugeGrowthLimit = 2.1;

GaugeFamily gauge_diffusion_family(const Function1D& drift, const Function1D& base_diffusion,
                                   double anchor, double offset, const Box& domain = Box{{-8.0}, {8.0}},
                                   std::size_t certificate_nodes = 4001);

// b2 = b1 - J grad ln p for a Langevin pair, using grad ln p = (2/beta) grad U.
CoefficientPair skew_drift_family(const CoefficientPair& langevin_pair, const Eigen::MatrixXd& j);
// Grid form: b2 = b1 - J grad ln p with grad ln p taken from the density grid.
VectorGridField skew_drift_field(const DensityGrid& p, const VectorField& drift,
                                 const Eigen::MatrixXd& j, Exec exec = Exec::parallel);

struct NonidentifiabilityOptions {
  double alpha = 0.05;
  Box condition_box;               // empty: [-4, 4]^d
  std::size_t condition_samples = 2000;
  Exec exec = Exec::parallel;
};

struct NonidentifiabilityReport {
  DistanceReport distance;
  double threshold = 0.0;       // per-statistic KS critical value from ESS
  std::size_t statistics = 0;   // number of KS statistics compared
  double ess_a = 0.0;
  double ess_b = 0.0;
  std::string verdict;          // "indistinguishable" or "distinguishable"
  ConditionReport conditions_a;
  ConditionReport conditions_b;
  std::vector<std::string> advisories;
  EmpiricalMeasure samples_a;
  EmpiricalMeasure samples_b;
};

// Simulates both pairs, compares them with the KS battery and declares them
// indistinguishable iff every statistic is below c(alpha / k) sqrt((e1 + e2) / (e1 e2)),
// with e1, e2 the effective sample sizes. Condition violations other than
// degeneracy are recorded as advisories.
NonidentifiabilityReport verify_nonidentifiability(const CoefficientPair& a, const CoefficientPair& b,
                                                   const SimConfig& cfg,
                                                   const NonidentifiabilityOptions& opts = {});

nlohmann::json to_json(const DistanceReport& report);
nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const NonidentifiabilityReport& report);

}  // namespace ergoinv
