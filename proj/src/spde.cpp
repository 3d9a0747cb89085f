#include "ergoinv/spde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ergoinv/error.hpp"
#include "ergoinv/rng.hpp"

namespace ergoinv {

SpectralBasis::SpectralBasis(std::size_t n_modes, std::size_t nodes) : n_(n_modes) {
  if (n_modes == 0) throw Error(ErrorKind::config, "n_modes must be positive");
  if (nodes == 0) nodes = 4 * n_modes + 1;
  if (nodes < 3 || nodes % 2 == 0) throw Error(ErrorKind::config, "quadrature nodes must be odd and >= 3");
  const double h = 1.0 / static_cast<double>(nodes - 1);
  xi_.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) xi_[j] = static_cast<double>(j) * h;
  w_ = simpson_weights(nodes, h);
  table_.resize(n_modes * nodes);
  for (std::size_t k = 1; k <= n_modes; ++k) {
    for (std::size_t j = 0; j < nodes; ++j) {
      table_[(k - 1) * nodes + j] =
          std::numbers::sqrt2 * std::sin(static_cast<double>(k) * std::numbers::pi * xi_[j]);
    }
  }
}

double SpectralBasis::eigenvalue(std::size_t k) const {
  const double kp = static_cast<double>(k) * std::numbers::pi;
  return kp * kp;
}

void SpectralBasis::evaluate(std::span<const double> coeffs, std::span<double> field) const {
  const std::size_t m = xi_.size();
  std::fill(field.begin(), field.end(), 0.0);
  for (std::size_t k = 0; k < n_; ++k) {
    const double c = coeffs[k];
    const double* row = table_.data() + k * m;
    for (std::size_t j = 0; j < m; ++j) field[j] += c * row[j];
  }
}

void SpectralBasis::project(std::span<const double> field, std::span<double> coeffs) const {
  const std::size_t m = xi_.size();
  for (std::size_t k = 0; k < n_; ++k) {
    const double* row = table_.data() + k * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += w_[j] * field[j] * row[j];
    coeffs[k] = acc;
  }
}

double SpectralBasis::integrate(std::span<const double> field) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < xi_.size(); ++j) acc += w_[j] * field[j];
  return acc;
}

// ---- potentials -------------------------------------------------------------------

SpdePotential SpdePotential::linear(double alpha) {
  SpdePotential p;
  p.name = "linear";
  p.alpha = alpha;
  p.u = [alpha](double s) { return -0.5 * alpha * s * s; };
  p.du = [alpha](double s) { return -alpha * s; };
  return p;
}

SpdePotential SpdePotential::zero() {
  SpdePotential p;
  p.name = "zero";
  p.u = [](double) { return 0.0; };
  p.du = [](double) { return 0.0; };
  return p;
}

SpdePotential SpdePotential::allen_cahn() {
  SpdePotential p;
  p.name = "allen_cahn";
  p.u = [](double s) { return 0.5 * s * s - 0.25 * s * s * s * s; };
  p.du = [](double s) { return s - s * s * s; };
  return p;
}

SpdePotential SpdePotential::scaled(double c) const {
  SpdePotential p;
  p.name = name + "_scaled";
  p.alpha = c * alpha;
  auto u0 = u;
  auto du0 = du;
  p.u = [u0, c](double s) { return c * u0(s); };
  p.du = [du0, c](double s) { return c * du0(s); };
  return p;
}

SpdePotential spde_potential(const std::string& name, double alpha) {
  if (name == "linear") return SpdePotential::linear(alpha);
  if (name == "zero" || name == "free") return SpdePotential::zero();
  if (name == "allen_cahn") return SpdePotential::allen_cahn();
  throw Error(ErrorKind::config, "unknown SPDE potential '" + name + "' (linear, zero, allen_cahn)");
}

void SpdeConfig::validate() const {
  if (n_modes == 0) throw Error(ErrorKind::config, "n_modes must be positive");
  if (!(beta > 0.0)) throw Error(ErrorKind::config, "beta must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::config, "theta must lie in [0, 1]");
  if (!potential.du) throw Error(ErrorKind::config, "SPDE potential has no derivative");
  as_sim_config().validate();
}

SimConfig SpdeConfig::as_sim_config() const {
  SimConfig s;
  s.dt = dt;
  s.n_steps = n_steps;
  s.n_chains = n_chains;
  s.burn_in_fraction = burn_in_fraction;
  s.thinning = thinning;
  s.seed = seed;
  s.blowup_radius = blowup_radius;
  return s;
}

// ---- simulation -------------------------------------------------------------------

namespace {

struct SpdeKernel {
  const SpectralBasis& basis;
  const SpdeConfig& cfg;
  std::vector<double> lhs;   // 1 + theta dt l_k
  std::vector<double> keep;  // 1 - (1 - theta) dt l_k

  SpdeKernel(const SpectralBasis& b, const SpdeConfig& c) : basis(b), cfg(c) {
    for (std::size_t k = 1; k <= b.modes(); ++k) {
      const double a = c.dt * b.eigenvalue(k);
      lhs.push_back(1.0 + c.theta * a);
      keep.push_back(1.0 - (1.0 - c.theta) * a);
    }
  }

  void run_chain(std::size_t chain, std::span<double> out, std::vector<double>* final_state) const {
    const std::size_t n = basis.modes();
    const CounterRng rng(cfg.seed);
    std::vector<double> x(n, 0.0), field(basis.nodes()), reaction(n), xi(n);
    const double noise = std::sqrt(cfg.beta * cfg.dt);
    const SimConfig sim = cfg.as_sim_config();
    const std::size_t burn = sim.burn_in_steps();
    const std::size_t per_chain = sim.samples_per_chain();
    const auto c = static_cast<std::uint32_t>(chain);
    std::size_t written = 0;
    for (std::size_t step = 0; step < cfg.n_steps; ++step) {
      basis.evaluate(x, field);
      for (double& f : field) f = cfg.potential.du(f);
      basis.project(field, reaction);
      rng.normals(Stream::increments, step, c, xi);
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = (keep[k] * x[k] + cfg.dt * reaction[k] + noise * xi[k]) / lhs[k];
        if (!(std::abs(x[k]) <= cfg.blowup_radius)) throw DivergenceError(chain, step + 1, x[k]);
      }
      const std::size_t state = step + 1;
      if (state > burn && (state - burn) % cfg.thinning == 0 && written < per_chain) {
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(written * n));
        ++written;
      }
    }
    if (final_state) *final_state = x;
  }
};

double max_second_derivative(const SpdePotential& p) {
  constexpr double h = 1e-4;
  double m = 0.0;
  for (int i = -300; i <= 300; ++i) {
    const double s = 0.01 * i;
    m = std::max(m, std::abs((p.du(s + h) - p.du(s - h)) / (2.0 * h)));
  }
  return m;
}

SpdeRun simulate_impl(const SpdeConfig& cfg, Exec exec) {
  cfg.validate();
  SpdeRun run{SpectralBasis(cfg.n_modes, cfg.quadrature_nodes), {}, 0.0, 0.0, {}, {}};
  const SpectralBasis& basis = run.basis;
  const std::size_t n = basis.modes();
  const SimConfig sim = cfg.as_sim_config();
  const std::size_t per_chain = sim.samples_per_chain();

  if (2 * n > basis.nodes()) {
    run.warnings.push_back("quadrature resolution: N exceeds half the spatial quadrature nodes");
  }
  run.linear_stiffness = cfg.dt * basis.eigenvalue(n);
  run.reaction_stiffness = cfg.dt * max_second_derivative(cfg.potential);
  if (cfg.theta < 0.5 && run.linear_stiffness * (1.0 - 2.0 * cfg.theta) >= 2.0) {
    run.warnings.push_back("linear part unstable for this dt and theta");
  }
  if (run.reaction_stiffness > 0.5) {
    std::ostringstream os;
    os << "dt * max|U''| on [-3, 3] is " << run.reaction_stiffness << "; explicit reaction may be unstable";
    run.warnings.push_back(os.str());
  }

  EmpiricalMeasure& em = run.modes;
  em.dim = n;
  em.samples.assign(cfg.n_chains * per_chain * n, 0.0);
  for (std::size_t c = 0; c < cfg.n_chains; ++c) em.chains.push_back({c, cfg.seed, c * per_chain, per_chain});

  const SpdeKernel kernel(basis, cfg);
  std::vector<std::exception_ptr> failures(cfg.n_chains);
  const auto nc = static_cast<std::ptrdiff_t>(cfg.n_chains);
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::parallel)
  for (std::ptrdiff_t cc = 0; cc < nc; ++cc) {
    const auto chain = static_cast<std::size_t>(cc);
    try {
      kernel.run_chain(chain, std::span<double>(em.samples).subspan(chain * per_chain * n, per_chain * n),
                       chain == 0 ? &run.final_state : nullptr);
    } catch (...) {
      failures[chain] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  finalize_statistics(em);
  run.warnings.insert(run.warnings.end(), em.warnings.begin(), em.warnings.end());
  return run;
}

}  // namespace

SpdeRun simulate_spde(const SpdeConfig& cfg, Exec exec) { return simulate_impl(cfg, exec); }

namespace reference {

SpdeRun simulate_spde(const SpdeConfig& cfg) { return simulate_impl(cfg, Exec::serial); }

}  // namespace reference

double spde_linear_variance(double beta, double lambda, double alpha) {
  return beta / (2.0 * (lambda + alpha));
}

double spde_scheme_variance(const SpdeConfig& cfg, std::size_t k) {
  const double a = cfg.dt * static_cast<double>(k * k) * std::numbers::pi * std::numbers::pi;
  const double lhs = 1.0 + cfg.theta * a;
  const double c = (1.0 - (1.0 - cfg.theta) * a - cfg.potential.alpha * cfg.dt) / lhs;
  return cfg.beta * cfg.dt / (lhs * lhs * (1.0 - c * c));
}

ModeStatistics mode_statistics(const EmpiricalMeasure& modes) {
  const std::size_t n = modes.dim;
  const std::size_t count = modes.size();
  ModeStatistics s;
  s.mean.assign(n, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const auto x = modes.sample(i);
    for (std::size_t k = 0; k < n; ++k) s.mean[k] += x[k];
  }
  for (double& m : s.mean) m /= static_cast<double>(count);
  s.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> c(n);
  for (std::size_t i = 0; i < count; ++i) {
    const auto x = modes.sample(i);
    for (std::size_t k = 0; k < n; ++k) c[k] = x[k] - s.mean[k];
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        s.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += c[a] * c[b];
      }
    }
  }
  s.covariance /= static_cast<double>(count - 1);
  s.covariance = s.covariance.selfadjointView<Eigen::Upper>();
  s.trace = s.covariance.trace();
  const double se = 1.0 / std::sqrt(std::max(modes.ess, 1.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto ia = static_cast<Eigen::Index>(a);
      const auto ib = static_cast<Eigen::Index>(b);
      const double corr = s.covariance(ia, ib) / std::sqrt(s.covariance(ia, ia) * s.covariance(ib, ib));
      s.max_cross_z = std::max(s.max_cross_z, std::abs(corr) / se);
    }
  }
  return s;
}

// ---- Gibbs measure ----------------------------------------------------------------

double gibbs_log_ratio(const SpectralBasis& basis, std::span<const double> coeffs,
                       const SpdePotential& potential, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorKind::precondition, "beta must be positive");
  if (coeffs.size() != basis.modes()) throw Error(ErrorKind::precondition, "coefficient count != N");
  std::vector<double> field(basis.nodes());
  basis.evaluate(coeffs, field);
  for (double& f : field) f = potential.u(f);
  return 2.0 * basis.integrate(field) / beta;
}

PartitionEstimate partition_function(const SpectralBasis& basis, const SpdePotential& potential,
                                     double beta, std::size_t samples, std::uint64_t seed) {
  if (samples < 8) throw Error(ErrorKind::precondition, "partition_function needs >= 8 samples");
  const CounterRng rng(seed);
  const std::size_t n = basis.modes();
  std::vector<double> sd(n), x(n), logs(samples);
  for (std::size_t k = 1; k <= n; ++k) sd[k - 1] = std::sqrt(beta / (2.0 * basis.eigenvalue(k)));
  for (std::size_t i = 0; i < samples; ++i) {
    rng.normals(Stream::reference_field, i, 0, x);
    for (std::size_t k = 0; k < n; ++k) x[k] *= sd[k];
    logs[i] = gibbs_log_ratio(basis, x, potential, beta);
  }
  // log-mean-exp over prefixes.
  auto log_mean = [&](std::size_t m, double* rel_se) {
    const double shift = *std::max_element(logs.begin(), logs.begin() + static_cast<std::ptrdiff_t>(m));
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = std::exp(logs[i] - shift);
      s1 += w;
      s2 += w * w;
    }
    const double md = static_cast<double>(m);
    const double mean = s1 / md;
    if (rel_se) *rel_se = std::sqrt(std::max(s2 / md - mean * mean, 0.0) / md) / mean;
    return shift + std::log(mean);
  };
  PartitionEstimate p;
  for (std::size_t div : {8u, 4u, 2u, 1u}) p.partial_log_means.push_back(log_mean(samples / div, nullptr));
  p.log_z = log_mean(samples, &p.relative_se);
  bool growing = true;
  for (std::size_t i = 1; i < p.partial_log_means.size(); ++i) {
    growing = growing && p.partial_log_means[i] - p.partial_log_means[i - 1] > 0.1;
  }
  p.integrability_warning = growing || !std::isfinite(p.log_z) || p.relative_se > 0.5;
  return p;
}

// ---- inversion --------------------------------------------------------------------

InversionReport invert_beta_spde(const EmpiricalMeasure& modes, const SpectralBasis& basis,
                                 const SpdePotential& potential, std::size_t k_modes) {
  if (modes.dim != basis.modes()) throw Error(ErrorKind::precondition, "sample dimension != N");
  if (k_modes == 0 || k_modes > basis.modes()) throw Error(ErrorKind::precondition, "K must lie in 1..N");
  if (modes.ess < kSpdeMinEss) {
    std::ostringstream os;
    os << "effective sample size " << modes.ess << " below " << kSpdeMinEss;
    throw Error(ErrorKind::insufficient_support, os.str());
  }
  const std::size_t count = modes.size();
  const std::size_t n = basis.modes();

  // Drift projections b_k for k = 1..K at every sample.
  std::vector<double> drift(count * k_modes);
  {
    std::vector<double> field(basis.nodes()), proj(n);
    for (std::size_t i = 0; i < count; ++i) {
      const auto x = modes.sample(i);
      basis.evaluate(x, field);
      for (double& f : field) f = potential.du(f);
      basis.project(field, proj);
      for (std::size_t k = 0; k < k_modes; ++k) {
        drift[i * k_modes + k] = -basis.eigenvalue(k + 1) * x[k] + proj[k];
      }
    }
  }

  InversionReport r;
  r.target = InversionTarget::beta_spde;
  r.formula_id = "beta_k = 2 m_k / s_k (mode regression over KDE score)";
  r.statistical = true;
  r.thresholds["modes"] = static_cast<double>(k_modes);
  r.thresholds["min_ess"] = kSpdeMinEss;
  const double rate = std::pow(static_cast<double>(count), -0.2);
  for (std::size_t k = 0; k < k_modes; ++k) {
    auto xs = modes.axis(k);
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(count - 1));
    const double spread = std::min(sd, (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34);
    const double h = 0.9 * spread * rate;
    for (int q = 5; q <= 95; q += 5) {
      if (q == 50) continue;
      const double y = quantile(sorted, q / 100.0);
      double f = 0.0, df = 0.0, fb = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const double z = (xs[i] - y) / h;
        const double w = std::exp(-0.5 * z * z);
        f += w;
        df += w * z / h;
        fb += w * drift[i * k_modes + k];
      }
      const double score = df / f;
      const double regression = fb / f;
      const double est = 2.0 * regression / score;
      r.pointwise_estimates.push_back(est);
    }
    r.thresholds["bandwidth_mode" + std::to_string(k + 1)] = h;
  }
  r.admissible = r.pointwise_estimates.size();
  r.beta = median(r.pointwise_estimates);
  r.dispersion = iqr(r.pointwise_estimates);
  return r;
}

SpdeDriftSection invert_drift_spde(const SpectralBasis& basis, const SpdePotential& potential,
                                   double beta, const std::vector<std::size_t>& active,
                                   const GridSpec& section, Exec exec) {
  const std::size_t k = active.size();
  if (k == 0 || k > 3) throw Error(ErrorKind::precondition, "section needs 1..3 active modes");
  if (section.dim() != k) throw Error(ErrorKind::precondition, "section grid dimension != active modes");
  for (std::size_t m : active) {
    if (m == 0 || m > basis.modes()) throw Error(ErrorKind::precondition, "active mode out of range");
  }
  SpdeDriftSection s;
  s.active = active;
  s.log_ratio = GridField(section);
  s.direct = VectorGridField(section);
  const std::size_t n = basis.modes();
  const auto count = static_cast<std::ptrdiff_t>(section.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < count; ++kk) {
    const auto node = static_cast<std::size_t>(kk);
    std::vector<double> coeffs(n, 0.0), field(basis.nodes()), proj(n);
    for (std::size_t a = 0; a < k; ++a) coeffs[active[a] - 1] = section.coordinate(a, section.axis_index(node, a));
    s.log_ratio.values[node] = gibbs_log_ratio(basis, coeffs, potential, beta);
    basis.evaluate(coeffs, field);
    for (double& f : field) f = potential.du(f);
    basis.project(field, proj);
    for (std::size_t a = 0; a < k; ++a) s.direct.components[a][node] = proj[active[a] - 1];
  }
  s.recovered = VectorGridField(section);
  for (std::size_t a = 0; a < k; ++a) {
    const auto d = differentiate(section, s.log_ratio.values, a, exec);
    for (std::size_t node = 0; node < section.size(); ++node) {
      s.recovered.components[a][node] = 0.5 * beta * d[node];
    }
  }
  for (std::size_t node = 0; node < section.size(); ++node) {
    if (!section.is_interior(node, 1)) continue;
    for (std::size_t a = 0; a < k; ++a) {
      s.max_abs_error = std::max(s.max_abs_error,
                                 std::abs(s.recovered.components[a][node] - s.direct.components[a][node]));
    }
  }
  return s;
}

// ---- output -----------------------------------------------------------------------

void write_mode_csv(const std::filesystem::path& path, const EmpiricalMeasure& modes,
                    const SimConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  os << "chain,step,mode,value\n" << std::setprecision(17);
  const std::size_t burn = cfg.burn_in_steps();
  for (const auto& c : modes.chains) {
    for (std::size_t i = 0; i < c.count; ++i) {
      const auto x = modes.sample(c.first_sample + i);
      const std::size_t step = burn + (i + 1) * cfg.thinning;
      for (std::size_t k = 0; k < modes.dim; ++k) {
        os << c.chain << "," << step << "," << (k + 1) << "," << x[k] << "\n";
      }
    }
  }
}

void write_field_snapshot_csv(const std::filesystem::path& path, const SpectralBasis& basis,
                              std::span<const double> coeffs) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  std::vector<double> field(basis.nodes());
  basis.evaluate(coeffs, field);
  os << "xi,value\n" << std::setprecision(17);
  for (std::size_t j = 0; j < field.size(); ++j) os << basis.points()[j] << "," << field[j] << "\n";
}

}  // namespace ergoinv
