#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergoinv/grid.hpp"

namespace ergoinv {

// out[i] = b_i(x).
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
// out is row-major d x m: out[i * m + l] = sigma_{il}(x).
using MatrixField = std::function<void(std::span<const double> x, std::span<double> out)>;
using ScalarField = std::function<double(std::span<const double> x)>;

enum class CoefficientKind { general, additive, langevin };
const char* to_string(CoefficientKind kind) noexcept;

// Finite-difference settings used to check drift == grad(potential).
inline constexpr double kGradientStep = 1e-5;
inline constexpr double kGradientTolerance = 1e-6;
// Slack absorbed by strict inequalities.
inline constexpr double kStrictSlack = 1e-12;

// Drift b and noise coefficient sigma of dX = b(X)dt + sigma(X)dW.
// Immutable once built; construct through the make_* factories, which
// enforce the kind-specific invariants.
class CoefficientPair {
public:
  std::size_t dim() const noexcept { return dim_; }
  std::size_t noise_dim() const noexcept { return noise_dim_; }
  CoefficientKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const std::optional<double>& beta() const noexcept { return beta_; }
  bool has_potential() const noexcept { return static_cast<bool>(potential_); }

  void drift(std::span<const double> x, std::span<double> out) const { drift_(x, out); }
  void sigma(std::span<const double> x, std::span<double> out) const { sigma_(x, out); }
  double potential(std::span<const double> x) const;

  std::vector<double> drift(std::span<const double> x) const;
  Eigen::MatrixXd sigma_matrix(std::span<const double> x) const;

  const VectorField& drift_field() const noexcept { return drift_; }
  const MatrixField& sigma_field() const noexcept { return sigma_; }
  const ScalarField& potential_field() const noexcept { return potential_; }

  friend CoefficientPair make_general(std::size_t, std::size_t, VectorField, MatrixField, std::string);
  friend CoefficientPair make_additive(std::size_t, std::size_t, VectorField, Eigen::MatrixXd, std::string);
  friend CoefficientPair make_langevin(std::size_t, ScalarField, VectorField, double, std::string,
                                       const Box*);

private:
  CoefficientPair() = default;

  std::size_t dim_ = 0;
  std::size_t noise_dim_ = 0;
  CoefficientKind kind_ = CoefficientKind::general;
  VectorField drift_;
  MatrixField sigma_;
  ScalarField potential_;
  std::optional<double> beta_;
  std::string name_;
};

CoefficientPair make_general(std::size_t d, std::size_t m, VectorField drift, MatrixField sigma,
                             std::string name = "general");
// Constant noise matrix (d x m).
CoefficientPair make_additive(std::size_t d, std::size_t m, VectorField drift,
                              Eigen::MatrixXd sigma, std::string name = "additive");
// dX = grad U dt + sqrt(beta) dW. When `gradient` is empty the drift is the
// central difference of U. Throws if the supplied gradient disagrees with the
// finite-difference gradient of U at points sampled in `check_box`
// (default [-2, 2]^d).
CoefficientPair make_langevin(std::size_t d, ScalarField potential, VectorField gradient,
                              double beta, std::string name = "langevin",
                              const Box* check_box = nullptr);

// Central-difference gradient of a potential with step kGradientStep.
void fd_gradient(const ScalarField& potential, std::span<const double> x, std::span<double> out);

// D(x) = sigma(x) sigma(x)^T / 2 and its smallest eigenvalue.
struct DiffusionTensor {
  Eigen::MatrixXd matrix;
  double min_eigenvalue = 0.0;
  bool degenerate = false;
};
DiffusionTensor diffusion_tensor(const CoefficientPair& pair, std::span<const double> x);
// Scalar D(x) of a one-dimensional pair.
double diffusion_1d(const CoefficientPair& pair, double x);

// ---- condition checking ---------------------------------------------------

struct ConditionViolation {
  std::string condition;  // "mon-", "coe-", "pol-", "non"
  std::vector<double> point;
  double value = 0.0;
};

// Constants estimated from quasi-random samples of the box. They are sampled
// estimates over the box, not certified bounds on all of R^d.
struct ConditionReport {
  double monotone_constant = 0.0;                 // L0
  double coercive_offset = 0.0;                   // L1
  double coercive_rate = 0.0;                     // L2
  double growth_offset = 0.0;                     // L3
  double growth_rate = 0.0;                       // L4
  double growth_exponent = 1.0;                   // q
  double min_eigen_diffusion = 0.0;
  std::size_t sampled_points = 0;
  std::vector<ConditionViolation> violations;
  bool pass = false;
};

ConditionReport check_conditions(const CoefficientPair& pair, const Box& domain,
                                 std::size_t n_samples, std::uint64_t seed,
                                 Exec exec = Exec::parallel);

// Halton points in [0,1)^dim with a seeded Cranley-Patterson rotation.
std::vector<std::vector<double>> halton_points(std::size_t count, std::size_t dim,
                                               std::uint64_t seed);

// ---- constructors -----------------------------------------------------------

// b(x) = sum a_i x^i (degree 2k+1), sigma(x) = sum c_j x^j (degree <= k+1).
// Requires a_{2k+1} < 0 and 2 a_{2k+1} + c_{k+1}^2 < 0, where missing
// trailing sigma coefficients are zero.
CoefficientPair polynomial_pair(std::span<const double> drift_coeffs,
                                std::span<const double> sigma_coeffs);

// (M - M^T) / 2.
Eigen::MatrixXd skew_matrix(const Eigen::MatrixXd& m);
// J with J(i,j) = entries in row-major upper-triangle order and J(j,i) = -J(i,j).
Eigen::MatrixXd skew_from_upper(std::size_t d, std::span<const double> upper_entries);

// ---- presets ----------------------------------------------------------------

// "ou": b = -x, sigma = sqrt(2).
// "cauchy_drift": b = -2x/(1+x^2), sigma = sqrt(2) (D = 1).
// "cauchy_gauge": b = -2x/(1+x^2), sigma = sqrt(2(2+x^2)) (D = 2+x^2).
// "double_well": Langevin with U = x^2/2 - x^4/4, beta = 2 (b = x - x^3).
// "quartic": Langevin with U = -x^4/4, beta = 2.
// "gaussian_2d": Langevin with U = -|x|^2/2, beta = 2.
// "skew_gaussian_2d": b = -x + Jx with J = [[0,1],[-1,0]], sigma = sqrt(2) Id.
CoefficientPair preset_pair(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ergoinv
