#include "ergoinv/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include "ergoinv/acceptance.hpp"
#include "ergoinv/config.hpp"
#include "ergoinv/density.hpp"
#include "ergoinv/expression.hpp"
#include "ergoinv/inversion.hpp"
#include "ergoinv/manifest.hpp"
#include "ergoinv/models.hpp"
#include "ergoinv/simulate.hpp"
#include "ergoinv/spde.hpp"

namespace ergoinv::cli {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return exit_config;
    case ErrorKind::coefficient:
    case ErrorKind::truncation:
    case ErrorKind::invalid_family:
    case ErrorKind::precondition: return exit_numerical_domain;
    case ErrorKind::divergence: return exit_divergence;
    case ErrorKind::insufficient_support: return exit_insufficient_support;
  }
  return exit_other;
}

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Weak-form residual limit reported for analytic densities.
constexpr double kWeakFormLimit = 1e-6;
constexpr double kModeVarianceLimit = 0.05;
constexpr double kMinEss = 100.0;

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  os << j.dump(2) << "\n";
}

std::vector<double> quantiles(std::vector<double> v, const std::vector<double>& qs) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double q : qs) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    out.push_back(i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i]);
  }
  return out;
}

json axis_summary(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m += e;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double e : v) s += (e - m) * (e - m);
  const auto q = quantiles(v, {0.05, 0.25, 0.5, 0.75, 0.95});
  return {{"mean", m},
          {"sd", std::sqrt(s / static_cast<double>(std::max<std::size_t>(v.size(), 2) - 1))},
          {"q05", q[0]}, {"q25", q[1]}, {"median", q[2]}, {"q75", q[3]}, {"q95", q[4]}};
}

json to_json(const ResidualReport& r) {
  json probes = json::array();
  for (const auto& w : r.weak_form_values) {
    probes.push_back({{"id", w.id}, {"center", w.center}, {"radius", w.radius}, {"value", w.value}});
  }
  return {{"linf", r.linf}, {"l2", r.l2}, {"interior_margin", r.interior_margin},
          {"evaluated_nodes", r.evaluated_nodes}, {"weak_form_max", r.weak_form_max()},
          {"weak_form", probes}};
}

json em_summary(const EmpiricalMeasure& em) {
  json axes = json::array();
  for (std::size_t a = 0; a < em.dim; ++a) axes.push_back(axis_summary(em.axis(a)));
  return {{"samples", em.size()}, {"chains", em.chains.size()}, {"ess", em.ess},
          {"ess_per_axis", em.ess_per_axis}, {"stability_advisory", em.stability_advisory},
          {"axes", axes}, {"warnings", em.warnings}};
}

class Command {
public:
  Command(const Options& opts, std::ostream& out) : opts_(opts), out_(out) {
    cfg_ = opts.config ? Config::load(*opts.config) : Config::parse("", "<defaults>");
    cfg_.require_known(config_schema());
    if (opts.seed) cfg_.set("run", "seed", std::to_string(*opts.seed));
    seed_ = cfg_.get_u64("run", "seed", kDefaultSeed);
    hash_ = sha256_hex(opts.command + "\n" + cfg_.canonical() + (opts.quick ? "quick\n" : ""));
    manifest_.command = opts.command;
    manifest_.config_hash = hash_;
    manifest_.seed = seed_;
    if (opts.quick) manifest_.advisories.push_back("quick mode: reduced sample sizes, verdicts are advisory");
  }

  Outcome execute() {
    const auto t0 = Clock::now();
    // Everything that can fail on configuration is resolved before the run
    // directory exists, so a malformed config leaves no output behind.
    std::function<void(RunDirectory&)> body = prepare();
    RunDirectory dir(opts_.out, opts_.command, hash_);
    body(dir);
    manifest_.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    Outcome o;
    o.run_dir = dir.commit(manifest_);
    o.exit_code = exit_code_;
    out_ << "run directory: " << o.run_dir.string() << "\n";
    return o;
  }

private:
  std::function<void(RunDirectory&)> prepare() {
    const auto& c = opts_.command;
    if (c == "simulate") return prepare_simulate();
    if (c == "density") return prepare_density();
    if (c == "invert") return prepare_invert();
    if (c == "counterexample") return prepare_counterexample();
    if (c == "spde") return prepare_spde();
    if (c == "acceptance") return prepare_acceptance();
    throw Error(ErrorKind::config, "unknown command '" + c + "'");
  }

  void check(const std::string& name, double value, double limit, const std::string& relation) {
    const bool pass = relation == "<=" ? value <= limit : value >= limit;
    manifest_.checks.push_back({name, pass, value, limit, relation});
  }
  void advise(const std::string& text) { manifest_.advisories.push_back(text); }

  CoefficientPair model() const {
    if (!cfg_.has_section("model")) return preset_pair("ou");
    return model_from_config(cfg_);
  }

  SimConfig sim_config(const std::string& section = "simulate") const {
    SimConfig s = sim_config_from(cfg_, section);
    if (opts_.quick) {
      s.n_steps = std::max<std::size_t>(2000, s.n_steps / 10);
      s.n_chains = std::min<std::size_t>(s.n_chains, 8);
    }
    return s;
  }

  DensityOptions density_options() const {
    DensityOptions d;
    d.tail_tol = cfg_.get_double("density", "tail_tol", d.tail_tol);
    d.strict_tail = cfg_.get_bool("density", "strict_tail", d.strict_tail);
    return d;
  }

  GridSpec grid_for(std::size_t dim) const {
    return grid_from_config(cfg_, dim, -10.0, 10.0, dim == 1 ? 4001 : 201);
  }

  // Analytic invariant density: closed form in 1D, Gibbs form for Langevin pairs.
  DensityGrid analytic_density(const CoefficientPair& pair, const GridSpec& grid,
                               const DensityOptions& dopts) const {
    if (pair.kind() == CoefficientKind::langevin) {
      return gibbs_density(pair.potential_field(), *pair.beta(), grid, dopts);
    }
    if (pair.dim() == 1) {
      return closed_form_density_1d(pair, grid.lower(0), grid.upper(0), grid.nodes(0), dopts);
    }
    throw Error(ErrorKind::config, cfg_.source() + ": analytic density needs d = 1 or a Langevin pair");
  }

  // Tail-mass advisory from the analytic reference, when one exists.
  void reference_advisories(const CoefficientPair& pair, const EmpiricalMeasure& em, json& summary) const {
    if (pair.dim() > 2 || (pair.dim() > 1 && pair.kind() != CoefficientKind::langevin)) {
      summary["reference"] = nullptr;
      return;
    }
    DensityOptions dopts = density_options();
    dopts.strict_tail = false;
    try {
      const auto p = analytic_density(pair, grid_for(pair.dim()), dopts);
      const auto d = distance(em, p);
      summary["reference"] = {{"tail_mass", p.tail_mass}, {"ks", d.ks}, {"axis_ks", d.axis_ks},
                              {"warnings", p.warnings}};
      if (p.tail_mass > dopts.tail_tol) {
        std::ostringstream os;
        os << "heavy tail: the invariant density carries mass " << p.tail_mass
           << " outside the grid box (tolerance " << dopts.tail_tol << ")";
        const_cast<Command*>(this)->advise(os.str());
      }
    } catch (const Error& e) {
      summary["reference"] = {{"error", e.what()}};
      const_cast<Command*>(this)->advise(std::string("no analytic reference: ") + e.what());
    }
  }

  std::function<void(RunDirectory&)> prepare_simulate() {
    auto pair = model();
    auto sim = sim_config();
    return [this, pair, sim](RunDirectory& dir) {
      const auto em = sample_invariant(pair, sim);
      write_samples_csv(dir.file("samples.csv"), em, sim);
      json summary = em_summary(em);
      summary["model"] = pair.name();
      summary["kind"] = to_string(pair.kind());
      summary["dimension"] = pair.dim();
      reference_advisories(pair, em, summary);
      write_json(dir.file("summary.json"), summary);
      bool finite = true;
      for (double v : em.samples) finite = finite && std::isfinite(v);
      check("samples_finite", finite ? 1.0 : 0.0, 1.0, ">=");
      check("ess", em.ess, kMinEss, ">=");
      for (const auto& w : em.warnings) advise(w);
      out_ << "simulated " << em.size() << " samples of " << pair.name() << " (ess " << em.ess << ")\n";
    };
  }

  DensityEstimate sampled_density(const CoefficientPair& pair, const SimConfig& sim, const GridSpec& grid,
                                  const std::string& method) const {
    const auto em = sample_invariant(pair, sim);
    if (method == "histogram") return histogram_density(em, grid);
    std::optional<std::vector<double>> bw;
    if (cfg_.has("density", "bandwidth")) {
      auto h = cfg_.get_list("density", "bandwidth", {});
      if (h.size() == 1) h.assign(pair.dim(), h.front());
      bw = h;
    }
    return kde_density(em, grid, Exec::parallel, bw);
  }

  std::function<void(RunDirectory&)> prepare_density() {
    auto pair = model();
    const std::string method = cfg_.get("density", "method", "analytic");
    if (method != "analytic" && method != "kde" && method != "histogram") {
      throw Error(ErrorKind::config, cfg_.source() + ": [density] method must be analytic, kde or histogram");
    }
    const auto grid = grid_for(pair.dim());
    const auto dopts = density_options();
    const std::size_t margin = cfg_.get_count("density", "margin", 2);
    std::optional<SimConfig> sim;
    if (method != "analytic") sim = sim_config();
    return [this, pair, method, grid, dopts, margin, sim](RunDirectory& dir) {
      json report;
      report["method"] = method;
      report["model"] = pair.name();
      DensityGrid p;
      if (method == "analytic") {
        p = analytic_density(pair, grid, dopts);
        const auto res = fp_residual(p, pair, margin);
        report["residual"] = to_json(res);
        check("weak_form_residual", res.weak_form_max(), kWeakFormLimit, "<=");
      } else {
        auto est = sampled_density(pair, *sim, grid, method);
        p = std::move(est.density);
        report["outside_fraction"] = est.outside_fraction;
        report["bandwidth"] = est.bandwidth;
        for (const auto& w : est.warnings) advise(w);
      }
      report["tail_mass"] = p.tail_mass;
      report["mass"] = p.mass;
      report["warnings"] = p.warnings;
      for (const auto& w : p.warnings) advise(w);
      write_density_csv(dir.file("density.csv"), p);
      write_density_json(dir.file("density.json"), p);
      write_json(dir.file("report.json"), report);
      out_ << "density (" << method << ") on " << p.grid.size() << " nodes, mass " << p.mass << "\n";
    };
  }

  std::function<void(RunDirectory&)> prepare_invert() {
    auto pair = model();
    const std::string target = cfg_.get("invert", "target", "");
    const std::string source = cfg_.get("invert", "source", "analytic");
    static const std::set<std::string> targets = {"drift_1d", "drift_langevin", "beta_additive", "beta_langevin"};
    if (!targets.count(target)) {
      throw Error(ErrorKind::config, cfg_.source() +
                                         ": [invert] target must be drift_1d, drift_langevin, beta_additive "
                                         "or beta_langevin");
    }
    if (source != "analytic" && source != "kde") {
      throw Error(ErrorKind::config, cfg_.source() + ": [invert] source must be analytic or kde");
    }
    if (target == "drift_1d" && pair.dim() != 1) {
      throw Error(ErrorKind::config, cfg_.source() + ": drift_1d needs a one-dimensional model");
    }
    Function1D diffusion = [pair](double x) { return diffusion_1d(pair, x); };
    if (cfg_.has("invert", "diffusion")) {
      auto e = std::make_shared<Expression>(Expression::compile(cfg_.get("invert", "diffusion", ""), {"x"}));
      diffusion = [e](double x) { return (*e)(std::span<const double>(&x, 1)); };
    }
    std::optional<double> beta;
    if (cfg_.has("invert", "beta")) beta = cfg_.get_double("invert", "beta", 2.0);
    else if (pair.beta()) beta = pair.beta();
    if (target == "drift_langevin" && !beta) {
      throw Error(ErrorKind::config, cfg_.source() + ": drift_langevin needs [invert] beta or a Langevin model");
    }
    const double eps = cfg_.get_double("invert", "eps", kAdmissibleRelative);
    const std::size_t resamples = cfg_.get_count("invert", "bootstrap", kBootstrapResamples);
    const auto grid = grid_for(pair.dim());
    const auto dopts = density_options();
    std::optional<SimConfig> sim;
    if (source == "kde") sim = sim_config();

    return [=, this](RunDirectory& dir) {
      const VectorField& drift = pair.drift_field();
      const bool scalar = target == "beta_additive" || target == "beta_langevin";
      auto invert = [&](const DensityGrid& p) {
        if (target == "drift_1d") return invert_drift_1d(p, diffusion);
        if (target == "drift_langevin") return invert_drift_langevin(p, *beta);
        if (target == "beta_additive") return invert_beta_additive(p, drift, eps);
        return invert_beta_langevin(p, drift, eps);
      };
      InversionReport rep;
      if (source == "kde" && scalar) {
        const auto em = sample_invariant(pair, *sim);
        rep = statistical_inversion(em, grid, invert, target == "beta_additive" ? 2 : 1,
                                    opts_.quick ? std::min<std::size_t>(resamples, 4) : resamples, seed_);
      } else {
        DensityGrid p;
        if (source == "kde") {
          auto est = sampled_density(pair, *sim, grid, "kde");
          p = std::move(est.density);
        } else {
          p = analytic_density(pair, grid, dopts);
        }
        for (const auto& w : p.warnings) advise(w);
        rep = invert(p);
        if (source == "kde") rep.statistical = true;
      }
      json j = to_json(rep);
      if (rep.drift) {
        std::vector<std::string> names;
        for (const auto& n : coordinate_names(pair.dim())) names.push_back("b_" + n);
        write_field_csv(dir.file("drift.csv"), *rep.drift, names);
        // Compare with the model drift on unmasked interior nodes.
        double err = 0.0;
        std::vector<double> x(pair.dim()), b(pair.dim());
        for (std::size_t k = 0; k < grid.size(); ++k) {
          if (rep.drift->mask[k] || !grid.is_interior(k, 1)) continue;
          grid.point(k, x);
          pair.drift(x, b);
          for (std::size_t a = 0; a < pair.dim(); ++a) {
            err = std::max(err, std::abs(rep.drift->components[a][k] - b[a]));
          }
        }
        j["max_abs_error_vs_model"] = err;
        out_ << "recovered drift on " << grid.size() << " nodes, max |error| vs model " << err << "\n";
      }
      if (rep.beta) out_ << "beta = " << *rep.beta << " (dispersion " << rep.dispersion << ")\n";
      for (const auto& w : rep.warnings) advise(w);
      write_json(dir.file("report.json"), j);
      check("masked_fraction", rep.masked_fraction, 0.5, "<=");
    };
  }

  std::function<void(RunDirectory&)> prepare_counterexample() {
    const std::string family = cfg_.get("counterexample", "family", "");
    const auto sim = sim_config();
    NonidentifiabilityOptions nopts;
    nopts.alpha = cfg_.get_double("counterexample", "alpha", nopts.alpha);

    std::optional<GaugeFamily> gauge;
    std::optional<CoefficientPair> a, b;
    if (family == "gauge-cauchy" || family == "gauge") {
      Function1D drift = [](double x) { return -2.0 * x / (1.0 + x * x); };
      Function1D base = [](double) { return 1.0; };
      if (family == "gauge") {
        if (!cfg_.has("counterexample", "drift") || !cfg_.has("counterexample", "base_diffusion")) {
          throw Error(ErrorKind::config, cfg_.source() + ": family gauge needs drift and base_diffusion");
        }
        auto be = std::make_shared<Expression>(Expression::compile(cfg_.get("counterexample", "drift", ""), {"x"}));
        auto de = std::make_shared<Expression>(
            Expression::compile(cfg_.get("counterexample", "base_diffusion", ""), {"x"}));
        drift = [be](double x) { return (*be)(std::span<const double>(&x, 1)); };
        base = [de](double x) { return (*de)(std::span<const double>(&x, 1)); };
      }
      const Box domain{{cfg_.get_double("counterexample", "lower", -8.0)},
                       {cfg_.get_double("counterexample", "upper", 8.0)}};
      gauge = gauge_diffusion_family(drift, base, cfg_.get_double("counterexample", "anchor", 0.0),
                                     cfg_.get_double("counterexample", "offset", 1.0), domain);
      a = gauge->base_pair("gauge_base");
      b = gauge->derived_pair("gauge_derived");
    } else if (family == "skew-gaussian-2d" || family == "skew") {
      const auto base = family == "skew" ? model() : preset_pair("gaussian_2d");
      const std::size_t d = base.dim();
      std::vector<double> upper(d * (d - 1) / 2, 0.0);
      if (family == "skew-gaussian-2d") upper = {1.0};
      upper = cfg_.get_list("counterexample", "j", upper);
      if (upper.size() != d * (d - 1) / 2) {
        throw Error(ErrorKind::config, cfg_.source() + ": [counterexample] j needs d(d-1)/2 entries");
      }
      a = base;
      b = skew_drift_family(base, skew_from_upper(d, upper));
    } else {
      throw Error(ErrorKind::config, cfg_.source() +
                                         ": [counterexample] family must be gauge-cauchy, gauge, "
                                         "skew-gaussian-2d or skew");
    }

    return [this, family, sim, nopts, gauge, a = *a, b = *b](RunDirectory& dir) {
      json j;
      j["family"] = family;
      j["pair_a"] = a.name();
      j["pair_b"] = b.name();
      if (gauge) {
        j["gauge"] = {{"anchor", gauge->anchor}, {"offset", gauge->offset}, {"constant", gauge->constant},
                      {"certificate_gap", gauge->certificate_gap}, {"certified", gauge->certified},
                      {"growth_exponent", gauge->growth_exponent}, {"growth_flag", gauge->growth_flag},
                      {"warnings", gauge->warnings}};
        check("gauge_certificate_gap", gauge->certificate_gap, kGaugeCertificateTol, "<=");
        for (const auto& w : gauge->warnings) advise(w);
        std::ofstream os(dir.file("gauge.csv"));
        os << "x,base_diffusion,diffusion\n" << std::setprecision(17);
        const double lo = gauge->domain.lower[0], hi = gauge->domain.upper[0];
        for (int i = 0; i <= 400; ++i) {
          const double x = lo + (hi - lo) * i / 400.0;
          os << x << "," << gauge->base_diffusion(x) << "," << gauge->diffusion(x) << "\n";
        }
      }
      const auto rep = verify_nonidentifiability(a, b, sim, nopts);
      j["report"] = to_json(rep);
      j["verdict"] = rep.verdict;
      write_json(dir.file("verdict.json"), j);
      for (const auto& adv : rep.advisories) advise(adv);
      check("max_ks", rep.distance.ks, rep.threshold, "<=");
      out_ << family << ": " << rep.verdict << " (ks " << rep.distance.ks << ", threshold " << rep.threshold
           << ")\n";
    };
  }

  std::function<void(RunDirectory&)> prepare_spde() {
    SpdeConfig s;
    const std::string potential = cfg_.get("spde", "potential", "linear");
    s.potential = spde_potential(potential, cfg_.get_double("spde", "alpha", 1.0));
    s.n_modes = cfg_.get_count("spde", "n_modes", s.n_modes);
    s.dt = cfg_.get_double("spde", "dt", s.dt);
    s.n_steps = cfg_.get_count("spde", "n_steps", 400000);
    s.n_chains = cfg_.get_count("spde", "n_chains", s.n_chains);
    s.burn_in_fraction = cfg_.get_double("spde", "burn_in_fraction", s.burn_in_fraction);
    s.thinning = cfg_.get_count("spde", "thinning", 32);
    s.beta = cfg_.get_double("spde", "beta", s.beta);
    s.theta = cfg_.get_double("spde", "theta", s.theta);
    s.quadrature_nodes = cfg_.get_count("spde", "quadrature_nodes", 0);
    s.seed = seed_;
    if (opts_.quick) {
      s.n_steps = std::max<std::size_t>(10000, s.n_steps / 8);
      s.n_chains = std::min<std::size_t>(s.n_chains, 4);
    }
    try {
      s.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::config, cfg_.source() + ": [spde] " + e.what());
    }
    const std::size_t k_modes = cfg_.get_count("spde", "k_modes", 4);
    const bool write_modes = cfg_.get_bool("spde", "write_modes", false);
    const bool exact_linear = potential == "linear" || potential == "zero" || potential == "free";

    return [this, s, k_modes, write_modes, exact_linear](RunDirectory& dir) {
      const auto run = simulate_spde(s);
      const auto stats = mode_statistics(run.modes);
      json modes = json::array();
      std::ofstream table(dir.file("variance_table.csv"));
      table << "mode,lambda,mean,variance,target,scheme_target,rel_error\n" << std::setprecision(17);
      double worst = 0.0;
      for (std::size_t k = 1; k <= s.n_modes; ++k) {
        const auto i = static_cast<Eigen::Index>(k - 1);
        const double lambda = run.basis.eigenvalue(k);
        const double v = stats.covariance(i, i);
        json m = {{"mode", k}, {"lambda", lambda}, {"mean", stats.mean[k - 1]}, {"variance", v}};
        table << k << "," << lambda << "," << stats.mean[k - 1] << "," << v;
        if (exact_linear) {
          const double target = spde_linear_variance(s.beta, lambda, s.potential.alpha);
          const double rel = v / target - 1.0;
          m["target"] = target;
          m["scheme_target"] = spde_scheme_variance(s, k);
          m["rel_error"] = rel;
          table << "," << target << "," << spde_scheme_variance(s, k) << "," << rel;
          if (k <= 8) worst = std::max(worst, std::abs(rel));
        } else {
          table << ",,,";
        }
        table << "\n";
        modes.push_back(m);
      }
      json j = {{"potential", s.potential.name}, {"beta", s.beta}, {"n_modes", s.n_modes}, {"theta", s.theta},
                {"samples", run.modes.size()}, {"ess", run.modes.ess}, {"trace", stats.trace},
                {"max_cross_z", stats.max_cross_z}, {"linear_stiffness", run.linear_stiffness},
                {"reaction_stiffness", run.reaction_stiffness}, {"modes", modes}, {"warnings", run.warnings}};
      for (const auto& w : run.warnings) advise(w);
      if (exact_linear) check("max_mode_variance_rel_error_k1_8", worst, kModeVarianceLimit, "<=");
      if (s.potential.name == "zero") {
        double truncated = 0.0;
        for (std::size_t k = 1; k <= s.n_modes; ++k) truncated += s.beta / (2.0 * run.basis.eigenvalue(k));
        j["trace_target"] = s.beta / 12.0;
        j["trace_target_truncated"] = truncated;
        check("free_field_trace_rel_error", std::abs(stats.trace / (s.beta / 12.0) - 1.0), kModeVarianceLimit,
              "<=");
      }
      if (k_modes > 0) {
        try {
          const auto rep = invert_beta_spde(run.modes, run.basis, s.potential, std::min(k_modes, s.n_modes));
          j["beta_inversion"] = to_json(rep);
          out_ << "beta from modes 1.." << std::min(k_modes, s.n_modes) << ": " << *rep.beta << "\n";
        } catch (const Error& e) {
          if (!opts_.quick || e.kind() != ErrorKind::insufficient_support) throw;
          j["beta_inversion"] = {{"error", e.what()}};
          advise(std::string("beta inversion skipped: ") + e.what());
        }
      }
      write_json(dir.file("modes.json"), j);
      write_field_snapshot_csv(dir.file("snapshot.csv"), run.basis, run.final_state);
      if (write_modes) write_mode_csv(dir.file("modes.csv"), run.modes, s.as_sim_config());
      out_ << "spde (" << s.potential.name << ", N = " << s.n_modes << "): " << run.modes.size()
           << " samples, trace " << stats.trace << "\n";
    };
  }

  std::function<void(RunDirectory&)> prepare_acceptance() {
    AcceptanceOptions a;
    a.quick = opts_.quick;
    a.seed = seed_;
    for (double id : cfg_.get_list("acceptance", "criteria", {})) a.criteria.push_back(static_cast<int>(id));
    for (const auto& [key, value] : cfg_.entries("tolerances")) {
      a.tolerance_overrides[key] = cfg_.get_double("tolerances", key, 0.0);
    }
    const auto defaults = default_tolerances();
    for (const auto& [key, value] : a.tolerance_overrides) {
      if (!defaults.count(key)) throw Error(ErrorKind::config, cfg_.source() + ": unknown tolerance '" + key + "'");
    }
    for (int id : a.criteria) {
      if (id < 1 || id > 10) throw Error(ErrorKind::config, cfg_.source() + ": unknown criterion " + std::to_string(id));
    }
    return [this, a](RunDirectory& dir) {
      const auto summary = run_acceptance(a, [this](const CriterionResult& r) {
        out_ << format_result(r) << std::endl;
        manifest_.checks.push_back({"criterion_" + std::to_string(r.id), r.pass, r.pass ? 1.0 : 0.0, 1.0, ">="});
      });
      write_json(dir.file("acceptance.json"), to_json(summary));
      if (!summary.all_pass()) exit_code_ = exit_acceptance_failure;
      out_ << (summary.all_pass() ? "acceptance: all criteria pass" : "acceptance: FAILED") << "\n";
    };
  }

  const Options& opts_;
  std::ostream& out_;
  Config cfg_ = Config::parse("", "<defaults>");
  std::uint64_t seed_ = kDefaultSeed;
  std::string hash_;
  RunManifest manifest_;
  int exit_code_ = exit_ok;
};

}  // namespace

Outcome run(const Options& opts, std::ostream& out, std::ostream& err) {
  try {
    Command cmd(opts, out);
    return cmd.execute();
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return {exit_code(e.kind()), {}};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return {exit_other, {}};
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Invariant-measure simulation and coefficient inversion for ergodic SDEs and SPDEs"};
  app.require_subcommand(1);
  Options opts;
  std::string config;
  std::string out = opts.out.string();
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "sample the invariant measure with Euler-Maruyama"},
      {"density", "invariant density on a grid (analytic, kde or histogram)"},
      {"invert", "recover drift or beta from an invariant density"},
      {"counterexample", "build a non-identifiable pair and compare their laws"},
      {"spde", "Galerkin stochastic heat equation: mode statistics and beta inversion"},
      {"acceptance", "run the acceptance suite"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output root directory")->capture_default_str();
    sub->add_option("--seed", seed, "seed (overrides [run] seed)");
    sub->add_flag("--quick", opts.quick, "reduced sample sizes, advisory verdicts");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }
  for (auto* sub : app.get_subcommands()) {
    opts.command = sub->get_name();
    if (sub->count("--seed")) opts.seed = seed;
  }
  if (!config.empty()) opts.config = config;
  opts.out = out;
  return run(opts, std::cout, std::cerr).exit_code;
}

}  // namespace ergoinv::cli
