#include "ergoinv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "ergoinv/error.hpp"
#include "ergoinv/rng.hpp"

namespace ergoinv {

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorKind::config, "dt must be positive");
  if (n_steps == 0) throw Error(ErrorKind::config, "n_steps must be positive");
  if (n_chains == 0) throw Error(ErrorKind::config, "n_chains must be positive");
  if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0)) {
    throw Error(ErrorKind::config, "burn_in_fraction must lie in (0, 1)");
  }
  if (thinning == 0) throw Error(ErrorKind::config, "thinning must be >= 1");
  if (samples_per_chain() == 0) throw Error(ErrorKind::config, "no samples survive burn-in and thinning");
}

std::size_t SimConfig::burn_in_steps() const {
  return static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(n_steps)));
}

std::size_t SimConfig::samples_per_chain() const { return (n_steps - burn_in_steps()) / thinning; }

std::vector<double> EmpiricalMeasure::axis(std::size_t a) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = samples[i * dim + a];
  return out;
}

std::vector<double> EmpiricalMeasure::chain_axis(std::size_t chain, std::size_t a) const {
  const auto& c = chains.at(chain);
  std::vector<double> out(c.count);
  for (std::size_t i = 0; i < c.count; ++i) out[i] = samples[(c.first_sample + i) * dim + a];
  return out;
}

std::vector<double> EmpiricalMeasure::project(std::span<const double> direction) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) acc += samples[i * dim + a] * direction[a];
    out[i] = acc;
  }
  return out;
}

std::vector<double> initial_state(const SimConfig& cfg, std::size_t dim, std::size_t chain) {
  const auto& ic = cfg.x0;
  std::vector<double> x(dim, 0.0);
  if (ic.kind == InitialCondition::Kind::point) {
    if (!ic.point.empty()) {
      if (ic.point.size() != dim) throw Error(ErrorKind::config, "x0 dimension mismatch");
      x = ic.point;
    }
    return x;
  }
  const CounterRng rng(cfg.seed);
  const auto c = static_cast<std::uint32_t>(chain);
  if (ic.kind == InitialCondition::Kind::normal) {
    std::vector<double> z(dim);
    rng.normals(Stream::initial_state, 0, c, z);
    for (std::size_t a = 0; a < dim; ++a) {
      x[a] = (ic.point.empty() ? 0.0 : ic.point.at(a)) + ic.scale * z[a];
    }
    return x;
  }
  if (ic.box.dim() != dim) throw Error(ErrorKind::config, "x0 box dimension mismatch");
  for (std::size_t a = 0; a < dim; a += 2) {
    const auto u = rng.uniform2(Stream::initial_state, 0, c, static_cast<std::uint32_t>(a / 2));
    x[a] = ic.box.lower[a] + u[0] * (ic.box.upper[a] - ic.box.lower[a]);
    if (a + 1 < dim) x[a + 1] = ic.box.lower[a + 1] + u[1] * (ic.box.upper[a + 1] - ic.box.lower[a + 1]);
  }
  return x;
}

namespace {

// One Euler-Maruyama step in place; returns |x|^2 after the step.
struct StepWorkspace {
  std::vector<double> b, s, xi;
};

double em_step(const CoefficientPair& pair, const CounterRng& rng, std::uint64_t step,
               std::uint32_t chain, double dt, double sqrt_dt, std::span<double> x,
               StepWorkspace& ws) {
  const std::size_t d = pair.dim();
  const std::size_t m = pair.noise_dim();
  pair.drift(x, ws.b);
  pair.sigma(x, ws.s);
  rng.normals(Stream::increments, step, chain, ws.xi);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double noise = 0.0;
    for (std::size_t l = 0; l < m; ++l) noise += ws.s[i * m + l] * ws.xi[l];
    x[i] += ws.b[i] * dt + noise * sqrt_dt;
    norm2 += x[i] * x[i];
  }
  return norm2;
}

// Runs one chain, writing the recorded post-burn-in states to `out`.
void run_chain(const CoefficientPair& pair, const SimConfig& cfg, std::size_t chain,
               std::span<double> out) {
  const std::size_t d = pair.dim();
  const CounterRng rng(cfg.seed);
  StepWorkspace ws{std::vector<double>(d), std::vector<double>(d * pair.noise_dim()),
                   std::vector<double>(pair.noise_dim())};
  auto x = initial_state(cfg, d, chain);
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double limit2 = cfg.blowup_radius * cfg.blowup_radius;
  const std::size_t burn = cfg.burn_in_steps();
  const auto c = static_cast<std::uint32_t>(chain);
  std::size_t written = 0;
  for (std::size_t n = 0; n < cfg.n_steps; ++n) {
    const double norm2 = em_step(pair, rng, n, c, cfg.dt, sqrt_dt, x, ws);
    if (!(norm2 <= limit2)) throw DivergenceError(chain, n + 1, std::sqrt(norm2));
    const std::size_t state = n + 1;
    if (state > burn && (state - burn) % cfg.thinning == 0 && written < cfg.samples_per_chain()) {
      std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(written * d));
      ++written;
    }
  }
}

double stability_estimate(const CoefficientPair& pair, const SimConfig& cfg) {
  const std::size_t d = pair.dim();
  const auto center = initial_state(cfg, d, 0);
  const auto pts = halton_points(8, d, 0xABCDEFull);
  constexpr double h = 1e-4;
  double lip = 0.0;
  std::vector<double> x(d), y(d), bx(d), by(d);
  for (const auto& u : pts) {
    for (std::size_t a = 0; a < d; ++a) x[a] = center[a] + 2.0 * u[a] - 1.0;
    pair.drift(x, bx);
    for (std::size_t a = 0; a < d; ++a) {
      y = x;
      y[a] += h;
      pair.drift(y, by);
      double col = 0.0;
      for (std::size_t i = 0; i < d; ++i) col += std::abs(by[i] - bx[i]) / h;
      lip = std::max(lip, col);
    }
  }
  return cfg.dt * lip;
}

EmpiricalMeasure sample_impl(const CoefficientPair& pair, const SimConfig& cfg, Exec exec) {
  cfg.validate();
  const std::size_t d = pair.dim();
  const std::size_t per_chain = cfg.samples_per_chain();
  EmpiricalMeasure em;
  em.dim = d;
  em.samples.assign(cfg.n_chains * per_chain * d, 0.0);
  for (std::size_t c = 0; c < cfg.n_chains; ++c) {
    em.chains.push_back({c, cfg.seed, c * per_chain, per_chain});
  }
  std::vector<std::exception_ptr> failures(cfg.n_chains);
  const auto nc = static_cast<std::ptrdiff_t>(cfg.n_chains);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < nc; ++c) {
      const auto chain = static_cast<std::size_t>(c);
      try {
        run_chain(pair, cfg, chain,
                  std::span<double>(em.samples).subspan(chain * per_chain * d, per_chain * d));
      } catch (...) {
        failures[chain] = std::current_exception();
      }
    }
  } else {
    for (std::size_t chain = 0; chain < cfg.n_chains; ++chain) {
      try {
        run_chain(pair, cfg, chain,
                  std::span<double>(em.samples).subspan(chain * per_chain * d, per_chain * d));
      } catch (...) {
        failures[chain] = std::current_exception();
      }
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  em.stability_advisory = stability_estimate(pair, cfg);
  if (em.stability_advisory > 0.5) {
    std::ostringstream os;
    os << "dt times the local drift Lipschitz estimate is " << em.stability_advisory
       << "; Euler-Maruyama may be unstable";
    em.warnings.push_back(os.str());
  }
  finalize_statistics(em);
  return em;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
  double acc = 0.0;
  for (double e : v) acc += (e - mean) * (e - mean);
  return v.size() > 1 ? acc / static_cast<double>(v.size() - 1) : 0.0;
}

}  // namespace

Trajectory euler_maruyama(const CoefficientPair& pair, const SimConfig& cfg, std::size_t chain) {
  if (!(cfg.dt > 0.0) || cfg.n_steps == 0) throw Error(ErrorKind::config, "invalid dt or n_steps");
  const std::size_t d = pair.dim();
  Trajectory t;
  t.dim = d;
  t.states.resize((cfg.n_steps + 1) * d);
  auto x = initial_state(cfg, d, chain);
  {
    const auto b = pair.drift(x);
    for (double v : b) {
      if (!std::isfinite(v)) throw Error(ErrorKind::coefficient, "drift is not finite at x0");
    }
  }
  std::copy(x.begin(), x.end(), t.states.begin());
  const CounterRng rng(cfg.seed);
  StepWorkspace ws{std::vector<double>(d), std::vector<double>(d * pair.noise_dim()),
                   std::vector<double>(pair.noise_dim())};
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double limit2 = cfg.blowup_radius * cfg.blowup_radius;
  for (std::size_t n = 0; n < cfg.n_steps; ++n) {
    const double norm2 = em_step(pair, rng, n, static_cast<std::uint32_t>(chain), cfg.dt, sqrt_dt, x, ws);
    if (!(norm2 <= limit2)) throw DivergenceError(chain, n + 1, std::sqrt(norm2));
    std::copy(x.begin(), x.end(), t.states.begin() + static_cast<std::ptrdiff_t>((n + 1) * d));
  }
  return t;
}

EmpiricalMeasure sample_invariant(const CoefficientPair& pair, const SimConfig& cfg, Exec exec) {
  return sample_impl(pair, cfg, exec);
}

double batch_means_tau(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) return 1.0;
  const auto batch = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t batches = n / batch;
  const double mean = mean_of(series);
  const double var = variance_of(series, mean);
  if (!(var > 0.0) || batches < 2) return 1.0;
  std::vector<double> means(batches);
  for (std::size_t k = 0; k < batches; ++k) means[k] = mean_of(series.subspan(k * batch, batch));
  const double bm_mean = mean_of(means);
  const double tau = static_cast<double>(batch) * variance_of(means, bm_mean) / var;
  return std::max(tau, 1.0 / static_cast<double>(batch));
}

MeanEstimate batch_mean_estimate(std::span<const double> series) {
  MeanEstimate e;
  e.mean = mean_of(series);
  const double var = variance_of(series, e.mean);
  e.standard_error = std::sqrt(var * batch_means_tau(series) / static_cast<double>(series.size()));
  return e;
}

MeanEstimate time_average(const EmpiricalMeasure& em, std::size_t chain, const ScalarField& f) {
  const auto& c = em.chains.at(chain);
  std::vector<double> series(c.count);
  for (std::size_t i = 0; i < c.count; ++i) series[i] = f(em.sample(c.first_sample + i));
  return batch_mean_estimate(series);
}

void finalize_statistics(EmpiricalMeasure& em) {
  em.ess_per_axis.assign(em.dim, 0.0);
  const double total = static_cast<double>(em.size());
  for (std::size_t a = 0; a < em.dim; ++a) {
    double tau_sum = 0.0;
    std::vector<double> chain_means;
    for (std::size_t c = 0; c < em.chains.size(); ++c) {
      const auto series = em.chain_axis(c, a);
      tau_sum += batch_means_tau(series);
      chain_means.push_back(mean_of(series));
    }
    const double tau = tau_sum / static_cast<double>(em.chains.size());
    em.ess_per_axis[a] = total / tau;

    if (em.chains.size() > 1) {
      const auto all = em.axis(a);
      const double pooled_mean = mean_of(all);
      const double sd = std::sqrt(variance_of(all, pooled_mean));
      const double per_chain = static_cast<double>(em.chains.front().count);
      const double se = sd * std::sqrt(tau / per_chain);
      double worst = 0.0;
      for (double m : chain_means) worst = std::max(worst, std::abs(m - pooled_mean));
      if (se > 0.0 && worst > 5.0 * se) {
        std::ostringstream os;
        os << "non-mixing advisory: chain means on axis " << a << " deviate by " << worst / se
           << " standard errors";
        em.warnings.push_back(os.str());
      }
    }
  }
  em.ess = em.ess_per_axis.empty() ? 0.0
                                   : *std::min_element(em.ess_per_axis.begin(), em.ess_per_axis.end());
}

// ---- density estimates --------------------------------------------------------

namespace {

double outside_fraction_of(const EmpiricalMeasure& em, const Box& box, double pad_fraction,
                           const GridSpec& grid) {
  std::size_t outside = 0;
  for (std::size_t i = 0; i < em.size(); ++i) {
    const auto x = em.sample(i);
    for (std::size_t a = 0; a < em.dim; ++a) {
      const double pad = pad_fraction * grid.spacing(a);
      if (x[a] < box.lower[a] - pad || x[a] >= box.upper[a] + pad) {
        ++outside;
        break;
      }
    }
  }
  return em.size() == 0 ? 1.0 : static_cast<double>(outside) / static_cast<double>(em.size());
}

void check_estimate_inputs(const EmpiricalMeasure& em, const GridSpec& grid) {
  if (em.dim != grid.dim()) throw Error(ErrorKind::precondition, "sample/grid dimension mismatch");
  if (em.size() < 1000) throw Error(ErrorKind::insufficient_support, "density estimates need >= 1000 samples");
}

void mass_loss_policy(DensityEstimate& est) {
  if (est.outside_fraction >= 1.0) {
    throw Error(ErrorKind::insufficient_support, "no samples fall inside the grid (mass loss 100%)");
  }
  if (est.outside_fraction > 0.0) {
    std::ostringstream os;
    os << "mass loss: " << 100.0 * est.outside_fraction << "% of samples lie outside the grid";
    est.warnings.push_back(os.str());
  }
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

DensityOptions lenient() {
  DensityOptions o;
  o.strict_tail = false;
  return o;
}

}  // namespace

DensityEstimate histogram_density(const EmpiricalMeasure& em, const GridSpec& grid) {
  check_estimate_inputs(em, grid);
  DensityEstimate est;
  est.outside_fraction = outside_fraction_of(em, grid.box(), 0.5, grid);
  mass_loss_policy(est);
  std::vector<double> counts(grid.size(), 0.0);
  for (std::size_t i = 0; i < em.size(); ++i) {
    const auto x = em.sample(i);
    std::size_t flat = 0;
    bool inside = true;
    for (std::size_t a = 0; a < em.dim && inside; ++a) {
      const double t = std::floor((x[a] - grid.lower(a)) / grid.spacing(a) + 0.5);
      if (t < 0.0 || t >= static_cast<double>(grid.nodes(a))) {
        inside = false;
      } else {
        flat += static_cast<std::size_t>(t) * grid.stride(a);
      }
    }
    if (inside) counts[flat] += 1.0;
  }
  const double scale = 1.0 / (static_cast<double>(em.size()) * grid.cell_volume());
  for (double& c : counts) c *= scale;
  est.density = DensityGrid::from_values(grid, std::move(counts), false, lenient());
  return est;
}

std::vector<double> silverman_bandwidth(const EmpiricalMeasure& em, std::size_t derivative_order) {
  std::vector<double> h(em.dim);
  const double n = static_cast<double>(em.size());
  const double rate =
      std::pow(n, -1.0 / (static_cast<double>(em.dim) + 4.0 + 2.0 * static_cast<double>(derivative_order)));
  for (std::size_t a = 0; a < em.dim; ++a) {
    auto col = em.axis(a);
    const double mean = mean_of(col);
    const double sd = std::sqrt(variance_of(col, mean));
    std::sort(col.begin(), col.end());
    const double iqr = quantile_sorted(col, 0.75) - quantile_sorted(col, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    h[a] = 0.9 * spread * rate;
    if (!(h[a] > 0.0)) throw Error(ErrorKind::insufficient_support, "degenerate sample spread for KDE");
  }
  return h;
}

namespace {

constexpr double kKernelCutoff = 8.0;

DensityEstimate finish_kde(const EmpiricalMeasure& em, const GridSpec& grid,
                           std::vector<double> values, std::vector<double> h) {
  DensityEstimate est;
  est.outside_fraction = outside_fraction_of(em, grid.box(), 0.0, grid);
  est.bandwidth = std::move(h);
  mass_loss_policy(est);
  est.density = DensityGrid::from_values(grid, std::move(values), true, lenient());
  return est;
}

double kernel_norm(const std::vector<double>& h) {
  double norm = 1.0;
  for (double v : h) norm *= v * std::sqrt(2.0 * std::numbers::pi);
  return norm;
}

}  // namespace

DensityEstimate kde_density(const EmpiricalMeasure& em, const GridSpec& grid, Exec exec,
                            std::optional<std::vector<double>> bandwidth) {
  check_estimate_inputs(em, grid);
  const auto h = bandwidth ? *bandwidth : silverman_bandwidth(em);
  const std::size_t d = em.dim;
  // Samples sorted by the first coordinate so each node scans a window.
  std::vector<std::size_t> order(em.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return em.samples[i * d] < em.samples[j * d];
  });
  std::vector<double> sorted(em.size() * d);
  for (std::size_t r = 0; r < order.size(); ++r) {
    std::copy_n(em.samples.begin() + static_cast<std::ptrdiff_t>(order[r] * d), d,
                sorted.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  std::vector<double> first(em.size());
  for (std::size_t r = 0; r < first.size(); ++r) first[r] = sorted[r * d];

  const double norm = kernel_norm(h) * static_cast<double>(em.size());
  std::vector<double> values(grid.size());
  const auto nn = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 64) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < nn; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    double x[3];
    grid.point(k, std::span<double>(x, d));
    const auto lo = std::lower_bound(first.begin(), first.end(), x[0] - kKernelCutoff * h[0]);
    const auto hi = std::upper_bound(first.begin(), first.end(), x[0] + kKernelCutoff * h[0]);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const auto r = static_cast<std::size_t>(it - first.begin());
      double e = 0.0;
      bool near = true;
      for (std::size_t a = 0; a < d; ++a) {
        const double z = (sorted[r * d + a] - x[a]) / h[a];
        if (std::abs(z) > kKernelCutoff) {
          near = false;
          break;
        }
        e += z * z;
      }
      if (near) acc += std::exp(-0.5 * e);
    }
    values[k] = acc / norm;
  }
  return finish_kde(em, grid, std::move(values), h);
}

namespace reference {

EmpiricalMeasure sample_invariant(const CoefficientPair& pair, const SimConfig& cfg) {
  return sample_impl(pair, cfg, Exec::serial);
}

DensityEstimate kde_density(const EmpiricalMeasure& em, const GridSpec& grid,
                            std::optional<std::vector<double>> bandwidth) {
  check_estimate_inputs(em, grid);
  const auto h = bandwidth ? *bandwidth : silverman_bandwidth(em);
  const std::size_t d = em.dim;
  const double norm = kernel_norm(h) * static_cast<double>(em.size());
  std::vector<double> values(grid.size());
  std::vector<double> x(d);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid.point(k, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < em.size(); ++i) {
      double e = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double z = (em.samples[i * d + a] - x[a]) / h[a];
        e += z * z;
      }
      acc += std::exp(-0.5 * e);
    }
    values[k] = acc / norm;
  }
  return finish_kde(em, grid, std::move(values), h);
}

}  // namespace reference

// ---- distances ----------------------------------------------------------------

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::precondition, "KS needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return worst;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::precondition, "W1 needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(a.front(), b.front());
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    const double v = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (v - prev);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    prev = v;
  }
  return total;
}

double ks_against_cdf(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorKind::precondition, "KS needs non-empty samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f),
                      std::abs(f - static_cast<double>(i) / n)});
  }
  return worst;
}

double ks_critical_value(double alpha, double n1, double n2) {
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt((n1 + n2) / (n1 * n2));
}

std::vector<std::vector<double>> projection_directions(std::size_t dim, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<std::vector<double>> dirs;
  for (std::uint32_t k = 0; k < 8; ++k) {
    std::vector<double> v(dim);
    rng.normals(Stream::projections, k, 0, v);
    double n = 0.0;
    for (double e : v) n += e * e;
    n = std::sqrt(n);
    for (double& e : v) e /= n;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

DistanceReport distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                        std::uint64_t projection_seed) {
  if (a.dim != b.dim) throw Error(ErrorKind::precondition, "distance: dimension mismatch");
  DistanceReport r;
  r.n1 = a.size();
  r.n2 = b.size();
  for (std::size_t ax = 0; ax < a.dim; ++ax) r.axis_ks.push_back(ks_two_sample(a.axis(ax), b.axis(ax)));
  if (a.dim == 1) {
    r.wasserstein1 = wasserstein1(a.axis(0), b.axis(0));
  } else {
    for (const auto& dir : projection_directions(a.dim, projection_seed)) {
      r.projection_ks.push_back(ks_two_sample(a.project(dir), b.project(dir)));
    }
  }
  r.ks = 0.0;
  for (double v : r.axis_ks) r.ks = std::max(r.ks, v);
  for (double v : r.projection_ks) r.ks = std::max(r.ks, v);
  return r;
}

DistanceReport distance(const EmpiricalMeasure& a, const DensityGrid& reference) {
  if (a.dim != reference.dim()) throw Error(ErrorKind::precondition, "distance: dimension mismatch");
  DistanceReport r;
  r.n1 = a.size();
  const GridSpec& g = reference.grid;
  for (std::size_t ax = 0; ax < a.dim; ++ax) {
    // Marginal along ax, then a trapezoid CDF normalized to end at 1.
    const std::size_t n = g.nodes(ax);
    std::vector<double> marginal(n, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const std::size_t j = g.axis_index(k, ax);
      marginal[j] += reference.values[k] * g.quadrature_weight(k) / g.axis_weights(ax)[j];
    }
    std::vector<double> cdf(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      cdf[j] = cdf[j - 1] + 0.5 * (marginal[j] + marginal[j - 1]) * g.spacing(ax);
    }
    const double total = cdf.back();
    for (double& c : cdf) c /= total;
    const double lo = g.lower(ax);
    const double h = g.spacing(ax);
    auto f = [&](double x) {
      const double t = (x - lo) / h;
      if (t <= 0.0) return 0.0;
      if (t >= static_cast<double>(n - 1)) return 1.0;
      const auto j = static_cast<std::size_t>(t);
      const double w = t - static_cast<double>(j);
      return (1.0 - w) * cdf[j] + w * cdf[j + 1];
    };
    r.axis_ks.push_back(ks_against_cdf(a.axis(ax), f));
  }
  r.ks = *std::max_element(r.axis_ks.begin(), r.axis_ks.end());
  return r;
}

void write_samples_csv(const std::filesystem::path& path, const EmpiricalMeasure& em,
                       const SimConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  os << "chain,step";
  for (std::size_t a = 0; a < em.dim; ++a) os << ",x" << (a + 1);
  os << "\n" << std::setprecision(17);
  const std::size_t burn = cfg.burn_in_steps();
  for (const auto& c : em.chains) {
    for (std::size_t i = 0; i < c.count; ++i) {
      os << c.chain << "," << (burn + (i + 1) * cfg.thinning);
      const auto x = em.sample(c.first_sample + i);
      for (double v : x) os << "," << v;
      os << "\n";
    }
  }
}

}  // namespace ergoinv
