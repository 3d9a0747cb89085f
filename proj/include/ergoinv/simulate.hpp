#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergoinv/density.hpp"
#include "ergoinv/grid.hpp"
#include "ergoinv/models.hpp"

namespace ergoinv {

inline constexpr std::uint64_t kDefaultSeed = 20240917ull;
inline constexpr std::uint64_t kProjectionSeed = 0x9A0B1C2Dull;

struct InitialCondition {
  enum class Kind { point, normal, uniform };
  Kind kind = Kind::point;
  std::vector<double> point;  // fixed point, or the mean for `normal`
  double scale = 1.0;         // standard deviation for `normal`
  Box box;                    // support for `uniform`

  static InitialCondition at(std::vector<double> x) { return {Kind::point, std::move(x), 1.0, {}}; }
  static InitialCondition normal(std::vector<double> mean, double sd) {
    return {Kind::normal, std::move(mean), sd, {}};
  }
  static InitialCondition uniform(Box b) { return {Kind::uniform, {}, 1.0, std::move(b)}; }
};

struct SimConfig {
  double dt = 1e-3;
  std::size_t n_steps = 200000;
  std::size_t n_chains = 32;
  double burn_in_fraction = 0.5;
  std::size_t thinning = 1;
  std::uint64_t seed = kDefaultSeed;
  InitialCondition x0;  // empty point => origin
  double blowup_radius = 1e8;

  void validate() const;
  std::size_t burn_in_steps() const;
  std::size_t samples_per_chain() const;
};

struct ChainProvenance {
  std::size_t chain = 0;
  std::uint64_t seed = 0;
  std::size_t first_sample = 0;
  std::size_t count = 0;
};

// Post-burn-in samples pooled over chains in chain order.
struct EmpiricalMeasure {
  std::size_t dim = 0;
  std::vector<double> samples;  // row-major, size() x dim
  std::vector<ChainProvenance> chains;
  std::vector<double> ess_per_axis;
  double ess = 0.0;  // min over axes
  double stability_advisory = 0.0;  // dt * local Lipschitz estimate of the drift
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return dim == 0 ? 0 : samples.size() / dim; }
  std::span<const double> sample(std::size_t i) const { return {samples.data() + i * dim, dim}; }
  std::vector<double> axis(std::size_t a) const;
  std::vector<double> chain_axis(std::size_t chain, std::size_t a) const;
  // Samples projected on a direction (length dim).
  std::vector<double> project(std::span<const double> direction) const;
};

struct Trajectory {
  std::size_t dim = 0;
  std::vector<double> states;  // (n_steps + 1) x dim, including x0
  std::size_t steps() const noexcept { return dim == 0 ? 0 : states.size() / dim - 1; }
  std::span<const double> state(std::size_t n) const { return {states.data() + n * dim, dim}; }
};

// X_{n+1} = X_n + b(X_n) dt + sigma(X_n) sqrt(dt) xi_n with xi_n drawn from the
// counter-based generator keyed by (seed, chain, n). Throws DivergenceError
// when |X_n| exceeds cfg.blowup_radius or becomes non-finite.
Trajectory euler_maruyama(const CoefficientPair& pair, const SimConfig& cfg, std::size_t chain = 0);

// Initial state of a chain under cfg.x0.
std::vector<double> initial_state(const SimConfig& cfg, std::size_t dim, std::size_t chain);

// Runs cfg.n_chains chains (OpenMP over chains when exec == parallel), discards
// burn-in, thins and pools. Output is bit-identical for either exec.
EmpiricalMeasure sample_invariant(const CoefficientPair& pair, const SimConfig& cfg,
                                  Exec exec = Exec::parallel);

// Integrated autocorrelation time of a series by non-overlapping batch means.
double batch_means_tau(std::span<const double> series);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};
// Mean of f along a series with a batch-means standard error.
MeanEstimate batch_mean_estimate(std::span<const double> series);
// Time average of f along one chain of the measure.
MeanEstimate time_average(const EmpiricalMeasure& em, std::size_t chain, const ScalarField& f);

void finalize_statistics(EmpiricalMeasure& em);

// ---- density estimates --------------------------------------------------------

struct DensityEstimate {
  DensityGrid density;
  double outside_fraction = 0.0;  // samples outside the grid box
  std::vector<double> bandwidth;  // KDE only
  std::vector<std::string> warnings;
};

// Bins of width h centered on nodes; values = count / (n * bin volume).
DensityEstimate histogram_density(const EmpiricalMeasure& em, const GridSpec& grid);
// Gaussian product kernel with per-axis bandwidth 0.9 min(sd, IQR/1.34) n^{-1/(d+4)},
// evaluated on the grid and renormalized by quadrature.
DensityEstimate kde_density(const EmpiricalMeasure& em, const GridSpec& grid,
                            Exec exec = Exec::parallel,
                            std::optional<std::vector<double>> bandwidth = std::nullopt);
// With derivative_order r > 0 the rate becomes n^{-1/(d+4+2r)}, the
// mean-square optimal rate for estimating r-th derivatives of the density.
std::vector<double> silverman_bandwidth(const EmpiricalMeasure& em, std::size_t derivative_order = 0);

// ---- distances ----------------------------------------------------------------

struct DistanceReport {
  double ks = 0.0;                      // max over all statistics below
  std::optional<double> wasserstein1;   // 1D only
  std::size_t n1 = 0;
  std::size_t n2 = 0;                   // 0 when compared against a grid
  std::vector<double> axis_ks;
  std::vector<double> projection_ks;    // d > 1, two-sample only
};

double ks_two_sample(std::vector<double> a, std::vector<double> b);
double wasserstein1(std::vector<double> a, std::vector<double> b);
double ks_against_cdf(std::vector<double> samples, const std::function<double(double)>& cdf);
// c(alpha) sqrt((n1 + n2) / (n1 n2)) with c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_critical_value(double alpha, double n1, double n2);
// The 8 fixed unit directions used by the projection battery.
std::vector<std::vector<double>> projection_directions(std::size_t dim, std::uint64_t seed);

DistanceReport distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                        std::uint64_t projection_seed = kProjectionSeed);
DistanceReport distance(const EmpiricalMeasure& a, const DensityGrid& reference);

// CSV rows: chain, step, x1..xd.
void write_samples_csv(const std::filesystem::path& path, const EmpiricalMeasure& em,
                       const SimConfig& cfg);

namespace reference {

// Same kernel as sample_invariant, chains strictly one after another.
EmpiricalMeasure sample_invariant(const CoefficientPair& pair, const SimConfig& cfg);
// Direct O(n * nodes) kernel sum with no window cutoff.
DensityEstimate kde_density(const EmpiricalMeasure& em, const GridSpec& grid,
                            std::optional<std::vector<double>> bandwidth = std::nullopt);

}  // namespace reference

}  // namespace ergoinv
