#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ergoinv/grid.hpp"
#include "ergoinv/inversion.hpp"
#include "ergoinv/simulate.hpp"

namespace ergoinv {

// Sine basis e_k(xi) = sqrt(2) sin(k pi xi) on (0, 1), k = 1..N, with the
// composite Simpson rule on `nodes` uniform points of [0, 1]. With 4N + 1
// nodes the rule integrates products of basis functions exactly.
class SpectralBasis {
public:
  explicit SpectralBasis(std::size_t n_modes, std::size_t nodes = 0);

  std::size_t modes() const noexcept { return n_; }
  std::size_t nodes() const noexcept { return xi_.size(); }
  double eigenvalue(std::size_t k) const;  // (k pi)^2, k = 1..N
  const std::vector<double>& points() const noexcept { return xi_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  double basis(std::size_t k, std::size_t node) const { return table_[(k - 1) * xi_.size() + node]; }

  // x(xi_j) = sum_k coeffs_k e_k(xi_j).
  void evaluate(std::span<const double> coeffs, std::span<double> field) const;
  // <e_k, f> for k = 1..N by quadrature.
  void project(std::span<const double> field, std::span<double> coeffs) const;
  // int_0^1 f by quadrature.
  double integrate(std::span<const double> field) const;

private:
  std::size_t n_;
  std::vector<double> xi_;
  std::vector<double> w_;
  std::vector<double> table_;
};

// Reaction potential U with derivative U'.
struct SpdePotential {
  std::string name;
  std::function<double(double)> u;
  std::function<double(double)> du;
  double alpha = 0.0;  // linear preset: U = -alpha s^2 / 2

  static SpdePotential linear(double alpha);
  static SpdePotential zero();
  // U = s^2/2 - s^4/4, U' = s - s^3.
  static SpdePotential allen_cahn();
  SpdePotential scaled(double c) const;
};

SpdePotential spde_potential(const std::string& name, double alpha = 1.0);

struct SpdeConfig {
  std::size_t n_modes = 16;
  double dt = 1e-3;
  std::size_t n_steps = 200000;
  std::size_t n_chains = 16;
  double burn_in_fraction = 0.5;
  std::size_t thinning = 1;
  std::uint64_t seed = kDefaultSeed;
  double beta = 2.0;
  SpdePotential potential = SpdePotential::linear(1.0);
  std::size_t quadrature_nodes = 0;  // 0: 4N + 1
  double theta = 0.5;                // implicitness of the linear part
  double blowup_radius = 1e8;

  void validate() const;
  SimConfig as_sim_config() const;
};

struct SpdeRun {
  SpectralBasis basis;
  EmpiricalMeasure modes;  // samples over R^N, one coordinate per mode
  double linear_stiffness = 0.0;    // dt * lambda_N
  double reaction_stiffness = 0.0;  // dt * max|U''| on [-3, 3]
  std::vector<double> final_state;  // coefficients of chain 0 at the last step
  std::vector<std::string> warnings;
};

// Galerkin truncation to N modes. Per step and mode:
//   x_k' = ((1 - (1-theta) dt l_k) x_k + dt <e_k, U'(x)> + sqrt(beta dt) xi_k) / (1 + theta dt l_k)
// with the reaction term explicit. theta = 1 is linear-implicit Euler.
SpdeRun simulate_spde(const SpdeConfig& cfg, Exec exec = Exec::parallel);

// Stationary variance of mode k under the discrete scheme for a linear
// potential, and the continuous-time value beta / (2 (l_k + alpha)).
double spde_linear_variance(double beta, double lambda, double alpha);
double spde_scheme_variance(const SpdeConfig& cfg, std::size_t k);

struct ModeStatistics {
  std::vector<double> mean;
  Eigen::MatrixXd covariance;
  double trace = 0.0;
  double max_cross_z = 0.0;  // largest |corr_ij| / (1/sqrt(ess)) over i != j
};
ModeStatistics mode_statistics(const EmpiricalMeasure& modes);

// (2 / beta) int_0^1 U(x(xi)) dxi, the log-density of the Gibbs measure
// relative to the Gaussian reference, without ln Z_U.
double gibbs_log_ratio(const SpectralBasis& basis, std::span<const double> coeffs,
                       const SpdePotential& potential, double beta);

struct PartitionEstimate {
  double log_z = 0.0;
  double relative_se = 0.0;
  std::vector<double> partial_log_means;  // after 1/8, 1/4, 1/2, all samples
  bool integrability_warning = false;
};
// Monte Carlo estimate of Z_U = E[exp(gibbs_log_ratio)] under the free field
// N(0, (beta/2) (-Delta)^{-1}) truncated to N modes.
PartitionEstimate partition_function(const SpectralBasis& basis, const SpdePotential& potential,
                                     double beta, std::size_t samples, std::uint64_t seed);

inline constexpr double kSpdeMinEss = 1e4;

// beta(y) = 2 m_k(y) / s_k(y) where m_k is the Nadaraya-Watson regression of
// the drift projection b_k = -l_k x_k + <e_k, U'(x)> on x_k and s_k the score
// of the Gaussian KDE of the x_k marginal; evaluated at the 5..45% and
// 55..95% quantiles of each mode k = 1..K; median aggregation.
InversionReport invert_beta_spde(const EmpiricalMeasure& modes, const SpectralBasis& basis,
                                 const SpdePotential& potential, std::size_t k_modes = 4);

struct SpdeDriftSection {
  std::vector<std::size_t> active;  // active mode numbers (1-based)
  GridField log_ratio;
  VectorGridField recovered;        // (beta/2) d_k log_ratio
  VectorGridField direct;           // <e_k, U'(x)> by quadrature
  double max_abs_error = 0.0;       // interior nodes
};

// Recovers the reaction drift on a section spanned by K <= 3 active modes,
// all other coefficients frozen at zero.
SpdeDriftSection invert_drift_spde(const SpectralBasis& basis, const SpdePotential& potential,
                                   double beta, const std::vector<std::size_t>& active,
                                   const GridSpec& section, Exec exec = Exec::parallel);

// CSV rows: chain, step, mode, value.
void write_mode_csv(const std::filesystem::path& path, const EmpiricalMeasure& modes,
                    const SimConfig& cfg);
// CSV rows: xi, value.
void write_field_snapshot_csv(const std::filesystem::path& path, const SpectralBasis& basis,
                              std::span<const double> coeffs);

namespace reference {

// Chains one after another.
SpdeRun simulate_spde(const SpdeConfig& cfg);

}  // namespace reference

}  // namespace ergoinv
