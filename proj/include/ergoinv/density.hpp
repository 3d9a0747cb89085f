#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ergoinv/grid.hpp"
#include "ergoinv/models.hpp"

namespace ergoinv {

// Nodes with p < kRelativeFloor * max(p) are masked for logarithmic operators.
inline constexpr double kRelativeFloor = 1e-12;
inline constexpr double kDefaultTailTol = 1e-6;

struct DensityOptions {
  double tail_tol = kDefaultTailTol;
  // When false, excess tail mass is recorded as a warning instead of thrown.
  bool strict_tail = true;
  Exec exec = Exec::parallel;
};

// Probability density sampled on a uniform grid. `log_values` holds ln p
// (computed in log-space where the density is analytic, -inf where p == 0).
struct DensityGrid {
  GridSpec grid;
  std::vector<double> values;
  std::vector<double> log_values;
  double mass = 0.0;            // Simpson integral of values
  bool normalized = false;
  double log_normalizer = 0.0;  // ln Z of the unnormalized input
  double tail_mass = 0.0;       // estimated mass outside the box, relative to Z
  std::vector<std::string> warnings;

  std::size_t dim() const noexcept { return grid.dim(); }
  double max_value() const;
  // Mask of nodes below the relative floor.
  std::vector<std::uint8_t> floor_mask() const;

  // Normalizes exp(log_unnormalized) by its quadrature after a max-shift.
  static DensityGrid from_log(GridSpec grid, std::vector<double> log_unnormalized,
                              const DensityOptions& opts = {});
  // Wraps nonnegative node values; normalizes by quadrature when `normalize`.
  static DensityGrid from_values(GridSpec grid, std::vector<double> values, bool normalize,
                                 const DensityOptions& opts = {});
};

struct NormalizationResult {
  double z = 0.0;
  double tail_estimate = 0.0;  // absolute extrapolated mass beyond the box
  bool divergent = false;      // values fail to decay toward some face
  bool heavy_tail = false;     // tail_estimate / z > tail_tol
  std::vector<std::string> warnings;
};

NormalizationResult normalization_constant(const GridSpec& grid, std::span<const double> values,
                                           double tail_tol = kDefaultTailTol);

// Cumulative primitive F(x) = int_{anchor}^{x} f on a table of spacing h,
// refined with per-cell Simpson; evaluation outside the table continues the
// composite rule.
class Primitive1D {
public:
  Primitive1D(std::function<double(double)> f, double anchor, double lower, double upper,
              double h);
  double operator()(double x) const;
  double anchor() const noexcept { return anchor_; }
  // Table value at anchor + i*h for integer i (must be inside the table).
  double at_offset(std::ptrdiff_t i) const;

private:
  double simpson_panel(double a, double b) const;

  std::function<double(double)> f_;
  double anchor_;
  double h_;
  std::ptrdiff_t lo_index_;
  std::vector<double> table_;
};

// p = (e^U / D) / Z with U the primitive of b/D anchored at the box center.
DensityGrid closed_form_density_1d(const CoefficientPair& pair, double lower, double upper,
                                   std::size_t n_nodes, const DensityOptions& opts = {});

// p = e^{2U/beta} / Z on the given grid (d <= 3).
DensityGrid gibbs_density(const ScalarField& potential, double beta, const GridSpec& grid,
                          const DensityOptions& opts = {});
DensityGrid gibbs_density(const ScalarField& potential, double beta, double lower, double upper,
                          std::size_t nodes_per_axis, std::size_t d,
                          const DensityOptions& opts = {});

// grad ln p from differences of log-values; nodes whose stencil touches the
// relative floor are masked.
VectorGridField grad_log(const DensityGrid& p, Exec exec = Exec::parallel);
GridField laplacian(const DensityGrid& p, Exec exec = Exec::parallel);
GridField divergence(const VectorGridField& v, Exec exec = Exec::parallel);

// Smooth bump exp(-1/(1 - |x-c|^2/r^2)) used as a weak-form probe.
struct BumpFunction {
  std::vector<double> center;
  double radius = 1.0;

  double value(std::span<const double> x) const;
  // Gradient and Hessian (row-major d x d); zero outside the support.
  void derivatives(std::span<const double> x, std::span<double> grad, std::span<double> hess) const;
};

// The fixed family of 8 probes for a box.
std::vector<BumpFunction> weak_form_probes(const Box& box);

struct WeakFormValue {
  std::size_t id = 0;
  std::vector<double> center;
  double radius = 0.0;
  double value = 0.0;
};

struct ResidualReport {
  double linf = 0.0;
  double l2 = 0.0;
  std::vector<WeakFormValue> weak_form_values;
  std::size_t interior_margin = 2;
  std::size_t evaluated_nodes = 0;

  double weak_form_max() const;
};

// Strong residual d_i d_j [D^{ij} p] - d_i [b^i p] on interior nodes plus the
// weak form  int p (D^{ij} d_ij phi + b^i d_i phi)  for each probe.
ResidualReport fp_residual(const DensityGrid& p, const CoefficientPair& pair,
                           std::size_t interior_margin = 2, Exec exec = Exec::parallel);

// ---- serialization ------------------------------------------------------------

// CSV rows: x1..xd, value, mask (17 significant digits).
void write_density_csv(const std::filesystem::path& path, const DensityGrid& p);
// JSON header: domain, nodes, spacing, mass, normalized, log_normalizer, tail_mass.
void write_density_json(const std::filesystem::path& path, const DensityGrid& p);
DensityGrid read_density(const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path);

// CSV rows: x1..xd, component values..., mask.
void write_field_csv(const std::filesystem::path& path, const VectorGridField& v,
                     const std::vector<std::string>& component_names);

}  // namespace ergoinv
