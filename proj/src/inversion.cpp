#include "ergoinv/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergoinv/error.hpp"
#include "ergoinv/rng.hpp"

namespace ergoinv {

const char* to_string(InversionTarget target) noexcept {
  switch (target) {
    case InversionTarget::drift_1d: return "drift_1d";
    case InversionTarget::drift_langevin: return "drift_langevin";
    case InversionTarget::beta_additive: return "beta_additive";
    case InversionTarget::beta_langevin: return "beta_langevin";
    case InversionTarget::beta_spde: return "beta_spde";
  }
  return "unknown";
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::precondition, "quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double iqr(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile(values, 0.75) - quantile(values, 0.25);
}

namespace {

void require_normalized(const DensityGrid& p) {
  if (!p.normalized) throw Error(ErrorKind::precondition, "inversion needs a normalized density");
}

void require_support(InversionReport& r, double masked_fraction) {
  r.masked_fraction = masked_fraction;
  if (masked_fraction > 0.5) {
    std::ostringstream os;
    os << "masked fraction " << masked_fraction << " exceeds 0.5";
    throw Error(ErrorKind::insufficient_support, os.str());
  }
}

void finish_scalar(InversionReport& r, std::size_t total_nodes) {
  r.admissible = r.pointwise_estimates.size();
  if (r.admissible < kMinAdmissibleNodes) {
    std::ostringstream os;
    os << "only " << r.admissible << " admissible nodes (need " << kMinAdmissibleNodes << ")";
    throw Error(ErrorKind::insufficient_support, os.str());
  }
  r.beta = median(r.pointwise_estimates);
  r.dispersion = iqr(r.pointwise_estimates);
  r.masked_fraction =
      1.0 - static_cast<double>(r.admissible) / static_cast<double>(std::max<std::size_t>(total_nodes, 1));
}

}  // namespace

InversionReport invert_drift_1d(const DensityGrid& p, const Function1D& diffusion, Exec exec) {
  require_normalized(p);
  if (p.dim() != 1) throw Error(ErrorKind::precondition, "invert_drift_1d needs a 1D density");
  const GridSpec& g = p.grid;
  std::vector<double> dvals(g.size()), log_pd(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = g.coordinate(0, k);
    dvals[k] = diffusion(x);
    if (!(dvals[k] > 0.0)) {
      std::ostringstream os;
      os << "diffusion D(x) = " << dvals[k] << " <= 0 at x = " << x;
      throw Error(ErrorKind::coefficient, os.str());
    }
    log_pd[k] = p.log_values[k] + std::log(dvals[k]);
  }
  // The floor mask of grad ln p also covers ln(pD).
  const auto score = grad_log(p, exec);
  InversionReport r;
  r.target = InversionTarget::drift_1d;
  r.formula_id = "b = D (ln(p D))'";
  VectorGridField b(g);
  b.mask = score.mask;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!b.mask[k]) b.components[0][k] = dvals[k] * first_difference(g, log_pd, k, 0);
  }
  require_support(r, b.masked_fraction());
  r.drift = std::move(b);
  return r;
}

InversionReport invert_drift_langevin(const DensityGrid& p, double beta, Exec exec) {
  require_normalized(p);
  if (!(beta > 0.0)) throw Error(ErrorKind::precondition, "beta must be positive");
  if (p.dim() > 3) throw Error(ErrorKind::precondition, "invert_drift_langevin supports d <= 3");
  auto b = grad_log(p, exec);
  for (auto& comp : b.components) {
    for (double& v : comp) v *= 0.5 * beta;
  }
  InversionReport r;
  r.target = InversionTarget::drift_langevin;
  r.formula_id = "b = (beta/2) grad ln p";
  require_support(r, b.masked_fraction());
  r.drift = std::move(b);
  return r;
}

InversionReport invert_beta_additive(const DensityGrid& p, const VectorField& drift, double eps,
                                     Exec exec) {
  require_normalized(p);
  const GridSpec& g = p.grid;
  const std::size_t d = g.dim();
  VectorGridField flux(g);
  std::vector<double> x(d), b(d);
  for (std::size_t k = 0; k < g.size(); ++k) {
    g.point(k, x);
    drift(x, b);
    for (std::size_t a = 0; a < d; ++a) flux.components[a][k] = b[a] * p.values[k];
  }
  const auto div = divergence(flux, exec);
  const auto lap = laplacian(p, exec);
  const auto floor_mask = p.floor_mask();

  double lap_max = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k, 1)) lap_max = std::max(lap_max, std::abs(lap.values[k]));
  }
  InversionReport r;
  r.target = InversionTarget::beta_additive;
  r.formula_id = "beta = 2 div(b p) / lap p";
  r.thresholds["eps_lap"] = eps;
  r.thresholds["min_admissible"] = static_cast<double>(kMinAdmissibleNodes);
  std::size_t interior = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k, 1)) continue;
    ++interior;
    if (floor_mask[k] || std::abs(lap.values[k]) <= eps * lap_max) continue;
    r.pointwise_estimates.push_back(2.0 * div.values[k] / lap.values[k]);
  }
  finish_scalar(r, interior);
  return r;
}

InversionReport invert_beta_langevin(const DensityGrid& p, const VectorField& drift, double eps,
                                     Exec exec) {
  require_normalized(p);
  const GridSpec& g = p.grid;
  const std::size_t d = g.dim();
  const auto score = grad_log(p, exec);
  InversionReport r;
  r.target = InversionTarget::beta_langevin;
  r.formula_id = "beta = 2 b_i / d_i ln p";
  r.thresholds["eps_grad"] = eps;
  r.thresholds["min_admissible"] = static_cast<double>(kMinAdmissibleNodes);
  if (score.masked_fraction() > 0.5) require_support(r, score.masked_fraction());

  std::vector<double> x(d), b(d);
  std::vector<double> score_max(d, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (score.mask[k]) continue;
    for (std::size_t a = 0; a < d; ++a) score_max[a] = std::max(score_max[a], std::abs(score.components[a][k]));
  }
  std::size_t candidates = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    candidates += d;
    if (score.mask[k]) continue;
    g.point(k, x);
    drift(x, b);
    for (std::size_t a = 0; a < d; ++a) {
      const double s = score.components[a][k];
      if (std::abs(s) <= eps * score_max[a]) continue;
      r.pointwise_estimates.push_back(2.0 * b[a] / s);
    }
  }
  finish_scalar(r, candidates);
  return r;
}

InversionReport statistical_inversion(const EmpiricalMeasure& em, const GridSpec& grid,
                                      const std::function<InversionReport(const DensityGrid&)>& invert,
                                      std::size_t derivative_order, std::size_t resamples,
                                      std::uint64_t seed, Exec exec) {
  const auto base = kde_density(em, grid, exec, silverman_bandwidth(em, derivative_order));
  InversionReport r = invert(base.density);
  r.statistical = true;
  r.warnings.insert(r.warnings.end(), base.warnings.begin(), base.warnings.end());
  r.thresholds["bandwidth"] = base.bandwidth.front();
  if (!r.beta || resamples < 2) return r;

  const CounterRng rng(seed);
  const std::size_t n = em.size();
  const double nd = static_cast<double>(n);
  std::vector<double> estimates;
  EmpiricalMeasure boot;
  boot.dim = em.dim;
  boot.samples.resize(em.samples.size());
  for (std::size_t s = 0; s < resamples; ++s) {
    for (std::size_t i = 0; i < n; i += 2) {
      const auto u = rng.uniform2(Stream::bootstrap, static_cast<std::uint32_t>(i >> 1),
                                  static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(i >> 33));
      for (std::size_t t = 0; t < 2 && i + t < n; ++t) {
        const auto src = std::min(n - 1, static_cast<std::size_t>(u[t] * nd));
        std::copy_n(em.samples.begin() + static_cast<std::ptrdiff_t>(src * em.dim), em.dim,
                    boot.samples.begin() + static_cast<std::ptrdiff_t>((i + t) * em.dim));
      }
    }
    const auto kde = kde_density(boot, grid, exec, base.bandwidth);
    estimates.push_back(*invert(kde.density).beta);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  r.bootstrap_dispersion = std::sqrt(var / static_cast<double>(estimates.size() - 1));
  r.thresholds["bootstrap_resamples"] = static_cast<double>(resamples);
  return r;
}

// ---- gauge family -----------------------------------------------------------------

namespace {

CoefficientPair pair_from_1d(const Function1D& drift, const Function1D& diffusion,
                             const std::string& name) {
  return make_general(
      1, 1, [drift](std::span<const double> x, std::span<double> out) { out[0] = drift(x[0]); },
      [diffusion](std::span<const double> x, std::span<double> out) {
        out[0] = std::sqrt(2.0 * diffusion(x[0]));
      },
      name);
}

}  // namespace

CoefficientPair GaugeFamily::base_pair(const std::string& name) const {
  return pair_from_1d(drift, base_diffusion, name);
}

CoefficientPair GaugeFamily::derived_pair(const std::string& name) const {
  return pair_from_1d(drift, diffusion, name);
}

GaugeFamily gauge_diffusion_family(const Function1D& drift, const Function1D& base_diffusion,
                                   double anchor, double offset, const Box& domain,
                                   std::size_t certificate_nodes) {
  domain.validate();
  if (domain.dim() != 1) throw Error(ErrorKind::precondition, "gauge family needs a 1D domain");
  const double lo = domain.lower[0];
  const double hi = domain.upper[0];
  const double d2_anchor = base_diffusion(anchor);
  if (!(d2_anchor > 0.0)) throw Error(ErrorKind::coefficient, "D2(x0) must be positive");
  if (!(offset > -d2_anchor)) {
    std::ostringstream os;
    os << "offset " << offset << " <= -D2(x0) = " << -d2_anchor << ": D1(x0) would not be positive";
    throw Error(ErrorKind::invalid_family, os.str());
  }

  GaugeFamily f;
  f.drift = drift;
  f.base_diffusion = base_diffusion;
  f.anchor = anchor;
  f.offset = offset;
  f.domain = domain;
  // The primitive is anchored at x0, so e^{U2(x0)} = 1.
  f.constant = offset / d2_anchor;
  const GridSpec grid(domain, {certificate_nodes});
  auto u2 = std::make_shared<Primitive1D>(
      [drift, base_diffusion](double x) { return drift(x) / base_diffusion(x); }, anchor, lo, hi,
      grid.spacing(0));
  const double c = f.constant;
  f.diffusion = [base_diffusion, u2, c](double x) {
    return base_diffusion(x) * (1.0 + c * std::exp(-(*u2)(x)));
  };

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(0, i);
    const double d1 = f.diffusion(x);
    if (!(d1 > 0.0)) {
      std::ostringstream os;
      os << "derived diffusion D1(" << x << ") = " << d1 << " <= 0: ellipticity lost";
      throw Error(ErrorKind::invalid_family, os.str());
    }
  }

  DensityOptions opts;
  opts.strict_tail = false;
  const auto p2 = closed_form_density_1d(f.base_pair(), lo, hi, certificate_nodes, opts);
  const auto p1 = closed_form_density_1d(f.derived_pair(), lo, hi, certificate_nodes, opts);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f.certificate_gap = std::max(f.certificate_gap, std::abs(p1.values[i] - p2.values[i]));
  }
  f.certified = f.certificate_gap <= kGaugeCertificateTol;
  if (!f.certified) {
    std::ostringstream os;
    os << "gauge certificate gap " << f.certificate_gap << " exceeds " << kGaugeCertificateTol;
    f.warnings.push_back(os.str());
  }

  const double edge = std::max(std::abs(lo), std::abs(hi));
  const double sign = std::abs(hi) >= std::abs(lo) ? 1.0 : -1.0;
  const double outer = f.diffusion(sign * edge);
  const double inner = f.diffusion(sign * 0.5 * edge);
  f.growth_exponent = std::log2(outer / inner);
  f.growth_flag = !(f.growth_exponent <= kGaugeGrowthLimit);
  if (f.growth_flag) {
    std::ostringstream os;
    os << "D1 grows like |x|^" << f.growth_exponent << " at the domain edge; polynomial growth checks fail";
    f.warnings.push_back(os.str());
  }
  return f;
}

// ---- skew family ------------------------------------------------------------------

namespace {

void require_skew(const Eigen::MatrixXd& j, std::size_t d) {
  if (static_cast<std::size_t>(j.rows()) != d || static_cast<std::size_t>(j.cols()) != d) {
    throw Error(ErrorKind::invalid_family, "J must be d x d");
  }
  const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
  if ((j + j.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::invalid_family, "J is not skew-symmetric");
  }
}

}  // namespace

CoefficientPair skew_drift_family(const CoefficientPair& pair, const Eigen::MatrixXd& j) {
  if (pair.kind() != CoefficientKind::langevin || !pair.beta()) {
    throw Error(ErrorKind::invalid_family, "skew family needs a Langevin pair");
  }
  const std::size_t d = pair.dim();
  if (d < 2) throw Error(ErrorKind::invalid_family, "skew family needs d >= 2");
  require_skew(j, d);
  const double beta = *pair.beta();
  const Eigen::MatrixXd scaled = (2.0 / beta) * j;
  const VectorField base = pair.drift_field();
  VectorField b2 = [base, scaled, d](std::span<const double> x, std::span<double> out) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(d));
    base(x, std::span<double>(b.data(), d));
    const Eigen::VectorXd r = b - scaled * b;
    for (std::size_t a = 0; a < d; ++a) out[a] = r[static_cast<Eigen::Index>(a)];
  };
  const Eigen::MatrixXd sigma = std::sqrt(beta) * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                                            static_cast<Eigen::Index>(d));
  return make_additive(d, d, std::move(b2), sigma, pair.name() + "_skew");
}

VectorGridField skew_drift_field(const DensityGrid& p, const VectorField& drift,
                                 const Eigen::MatrixXd& j, Exec exec) {
  const std::size_t d = p.dim();
  require_skew(j, d);
  const auto score = grad_log(p, exec);
  VectorGridField out(p.grid);
  out.mask = score.mask;
  std::vector<double> x(d), b(d);
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    p.grid.point(k, x);
    drift(x, b);
    for (std::size_t a = 0; a < d; ++a) {
      double js = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        js += j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) * score.components[c][k];
      }
      out.components[a][k] = out.mask[k] ? 0.0 : b[a] - js;
    }
  }
  return out;
}

// ---- verification -----------------------------------------------------------------

NonidentifiabilityReport verify_nonidentifiability(const CoefficientPair& a, const CoefficientPair& b,
                                                   const SimConfig& cfg,
                                                   const NonidentifiabilityOptions& opts) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::precondition, "pairs differ in dimension");
  const std::size_t d = a.dim();
  const Box box = opts.condition_box.dim() == d ? opts.condition_box : Box::cube(d, -4.0, 4.0);

  NonidentifiabilityReport r;
  r.conditions_a = check_conditions(a, box, opts.condition_samples, cfg.seed, opts.exec);
  r.conditions_b = check_conditions(b, box, opts.condition_samples, cfg.seed, opts.exec);
  for (const auto* c : {&r.conditions_a, &r.conditions_b}) {
    const std::string& name = c == &r.conditions_a ? a.name() : b.name();
    std::vector<std::string> seen;
    for (const auto& v : c->violations) {
      if (v.condition == "non") {
        throw Error(ErrorKind::precondition, name + ": diffusion is degenerate on the working box");
      }
      if (std::find(seen.begin(), seen.end(), v.condition) == seen.end()) {
        seen.push_back(v.condition);
        r.advisories.push_back(name + ": sampled check of condition " + v.condition + " failed");
      }
    }
  }

  SimConfig cfg_b = cfg;
  cfg_b.seed = derive_seed(cfg.seed, 0xB);
  r.samples_a = sample_invariant(a, cfg, opts.exec);
  r.samples_b = sample_invariant(b, cfg_b, opts.exec);
  r.distance = distance(r.samples_a, r.samples_b);
  r.ess_a = r.samples_a.ess;
  r.ess_b = r.samples_b.ess;
  r.statistics = r.distance.axis_ks.size() + r.distance.projection_ks.size();
  r.threshold = ks_critical_value(opts.alpha / static_cast<double>(r.statistics), r.ess_a, r.ess_b);
  r.verdict = r.distance.ks < r.threshold ? "indistinguishable" : "distinguishable";
  for (const auto& w : r.samples_a.warnings) r.advisories.push_back(a.name() + ": " + w);
  for (const auto& w : r.samples_b.warnings) r.advisories.push_back(b.name() + ": " + w);
  return r;
}

// ---- serialization ----------------------------------------------------------------

nlohmann::json to_json(const InversionReport& r) {
  nlohmann::json j;
  j["target"] = to_string(r.target);
  j["formula_id"] = r.formula_id;
  if (r.beta) {
    j["recovered"] = *r.beta;
    j["pointwise_count"] = r.pointwise_estimates.size();
  } else {
    j["recovered"] = "drift.csv";
  }
  j["aggregation"] = r.aggregation;
  j["dispersion"] = r.dispersion;
  j["masked_fraction"] = r.masked_fraction;
  j["admissible"] = r.admissible;
  j["thresholds"] = r.thresholds;
  j["statistical"] = r.statistical;
  if (r.bootstrap_dispersion) j["bootstrap_dispersion"] = *r.bootstrap_dispersion;
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::json to_json(const DistanceReport& r) {
  nlohmann::json j;
  j["ks"] = r.ks;
  if (r.wasserstein1) j["wasserstein1"] = *r.wasserstein1;
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  j["axis_ks"] = r.axis_ks;
  j["projection_ks"] = r.projection_ks;
  return j;
}

nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j;
  j["L0"] = r.monotone_constant;
  j["L1"] = r.coercive_offset;
  j["L2"] = r.coercive_rate;
  j["L3"] = r.growth_offset;
  j["L4"] = r.growth_rate;
  j["q"] = r.growth_exponent;
  j["min_eigen_diffusion"] = r.min_eigen_diffusion;
  j["sampled_points"] = r.sampled_points;
  j["violation_count"] = r.violations.size();
  nlohmann::json first = nlohmann::json::object();
  for (const auto& v : r.violations) {
    if (!first.contains(v.condition)) first[v.condition] = {{"point", v.point}, {"value", v.value}};
  }
  j["first_violations"] = first;
  j["pass"] = r.pass;
  return j;
}

nlohmann::json to_json(const NonidentifiabilityReport& r) {
  nlohmann::json j;
  j["distance"] = to_json(r.distance);
  j["threshold"] = r.threshold;
  j["statistics"] = r.statistics;
  j["ess_a"] = r.ess_a;
  j["ess_b"] = r.ess_b;
  j["verdict"] = r.verdict;
  j["conditions_a"] = to_json(r.conditions_a);
  j["conditions_b"] = to_json(r.conditions_b);
  j["advisories"] = r.advisories;
  return j;
}

}  // namespace ergoinv
