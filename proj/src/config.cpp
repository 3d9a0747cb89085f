#include "ergoinv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ergoinv/error.hpp"
#include "ergoinv/expression.hpp"

namespace ergoinv {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  auto error = [&](const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": " << msg;
    throw Error(ErrorKind::config, os.str());
  };
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') error("unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!valid_name(section)) error("invalid section name '" + section + "'");
      if (cfg.section_lines_.count(section)) error("duplicate section [" + section + "]");
      cfg.section_lines_[section] = line;
      cfg.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) error("expected 'key = value'");
    if (section.empty()) error("key outside of any [section]");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (!valid_name(key)) error("invalid key '" + key + "'");
    if (value.empty()) error("empty value for key '" + key + "'");
    auto& entries = cfg.sections_[section];
    if (entries.count(key)) error("duplicate key '" + key + "' in [" + section + "]");
    entries[key] = {value, line};
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool Config::has_section(const std::string& section) const { return sections_.count(section) > 0; }

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& msg) const {
  const Entry* e = find(section, key);
  std::ostringstream os;
  os << source_ << ":" << (e ? e->line : 0) << ": [" << section << "] " << key << ": " << msg;
  throw Error(ErrorKind::config, os.str());
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  try {
    const auto expr = Expression::compile(e->value, {});
    return expr(std::span<const double>());
  } catch (const Error& err) {
    fail(section, key, std::string("expected a number: ") + err.what());
  }
}

std::size_t Config::get_count(const std::string& section, const std::string& key,
                              std::size_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const double v = get_double(section, key, 0.0);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) fail(section, key, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const auto* first = e->value.data();
  const auto* last = first + e->value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(section, key, "expected an unsigned 64-bit integer");
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
  if (e->value == "false" || e->value == "no" || e->value == "0") return false;
  fail(section, key, "expected true or false");
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     std::vector<double> fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(e->value, ',')) {
    try {
      out.push_back(Expression::compile(item, {})(std::span<const double>()));
    } catch (const Error& err) {
      fail(section, key, std::string("expected a list of numbers: ") + err.what());
    }
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = {value, 0};
}

void Config::require_known(const std::map<std::string, std::set<std::string>>& schema) const {
  for (const auto& [section, entries] : sections_) {
    const auto s = schema.find(section);
    if (s == schema.end()) {
      std::ostringstream os;
      os << source_ << ":" << section_lines_.at(section) << ": unknown section [" << section << "]";
      throw Error(ErrorKind::config, os.str());
    }
    if (s->second.count("*")) continue;
    for (const auto& [key, entry] : entries) {
      if (!s->second.count(key)) fail(section, key, "unknown key");
    }
  }
}

std::string Config::canonical() const {
  std::ostringstream os;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) os << section << "." << key << "=" << entry.value << "\n";
  }
  return os.str();
}

std::vector<std::pair<std::string, std::string>> Config::entries(const std::string& section) const {
  std::vector<std::pair<std::string, std::string>> out;
  const auto s = sections_.find(section);
  if (s == sections_.end()) return out;
  for (const auto& [key, entry] : s->second) out.emplace_back(key, entry.value);
  return out;
}

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"run", {"seed"}},
      {"model", {"preset", "kind", "dimension", "noise_dimension", "drift", "sigma", "potential", "beta", "name"}},
      {"grid", {"lower", "upper", "nodes"}},
      {"simulate",
       {"dt", "n_steps", "n_chains", "burn_in_fraction", "thinning", "x0", "x0_sd", "blowup_radius"}},
      {"density", {"method", "tail_tol", "strict_tail", "margin", "bandwidth"}},
      {"invert", {"target", "source", "beta", "diffusion", "eps", "bootstrap"}},
      {"counterexample", {"family", "anchor", "offset", "alpha", "lower", "upper", "drift", "base_diffusion", "j"}},
      {"spde",
       {"potential", "alpha", "n_modes", "dt", "n_steps", "n_chains", "burn_in_fraction", "thinning", "beta",
        "theta", "quadrature_nodes", "k_modes", "write_modes"}},
      {"acceptance", {"criteria"}},
      {"tolerances", {"*"}},  // keys are checked by the acceptance suite
  };
  return schema;
}

CoefficientPair model_from_config(const Config& cfg, const std::string& section) {
  if (cfg.has(section, "preset")) {
    try {
      return preset_pair(cfg.get(section, "preset", ""));
    } catch (const Error& e) {
      std::ostringstream os;
      os << cfg.source() << ": [" << section << "] preset: " << e.what();
      throw Error(ErrorKind::config, os.str());
    }
  }
  const std::string kind = cfg.get(section, "kind", "");
  if (kind.empty()) throw Error(ErrorKind::config, cfg.source() + ": [" + section + "] needs preset or kind");
  const std::size_t d = cfg.get_count(section, "dimension", 1);
  if (d == 0) throw Error(ErrorKind::config, cfg.source() + ": [" + section + "] dimension must be >= 1");
  const auto vars = coordinate_names(d);
  const std::string name = cfg.get(section, "name", kind);

  if (kind == "langevin") {
    const double beta = cfg.get_double(section, "beta", 2.0);
    const auto u = std::make_shared<Expression>(Expression::compile(cfg.get(section, "potential", ""), vars));
    ScalarField potential = [u](std::span<const double> x) { return (*u)(x); };
    VectorField gradient;
    if (cfg.has(section, "drift")) {
      auto parts = split_list(cfg.get(section, "drift", ""), ';');
      if (parts.size() != d) throw Error(ErrorKind::config, cfg.source() + ": drift needs d components");
      auto exprs = std::make_shared<std::vector<Expression>>();
      for (const auto& p : parts) exprs->push_back(Expression::compile(p, vars));
      gradient = [exprs](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < exprs->size(); ++i) out[i] = (*exprs)[i](x);
      };
    }
    return make_langevin(d, potential, gradient, beta, name);
  }

  auto drift_parts = split_list(cfg.get(section, "drift", ""), ';');
  if (drift_parts.size() != d) {
    throw Error(ErrorKind::config, cfg.source() + ": [" + section + "] drift needs " + std::to_string(d) +
                                       " components separated by ';'");
  }
  auto drift_exprs = std::make_shared<std::vector<Expression>>();
  for (const auto& p : drift_parts) drift_exprs->push_back(Expression::compile(p, vars));
  VectorField drift = [drift_exprs](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < drift_exprs->size(); ++i) out[i] = (*drift_exprs)[i](x);
  };
  const auto rows = split_list(cfg.get(section, "sigma", ""), ';');
  if (rows.size() != d) throw Error(ErrorKind::config, cfg.source() + ": [" + section + "] sigma needs d rows");
  const std::size_t m = split_list(rows.front(), ',').size();
  auto sigma_exprs = std::make_shared<std::vector<Expression>>();
  for (const auto& row : rows) {
    const auto entries = split_list(row, ',');
    if (entries.size() != m) throw Error(ErrorKind::config, cfg.source() + ": sigma rows differ in length");
    for (const auto& e : entries) sigma_exprs->push_back(Expression::compile(e, vars));
  }
  if (kind == "additive") {
    Eigen::MatrixXd s(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t l = 0; l < m; ++l) {
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) =
            (*sigma_exprs)[i * m + l](std::vector<double>(d, 0.0));
      }
    }
    return make_additive(d, m, drift, s, name);
  }
  if (kind == "general") {
    MatrixField sigma = [sigma_exprs](std::span<const double> x, std::span<double> out) {
      for (std::size_t i = 0; i < sigma_exprs->size(); ++i) out[i] = (*sigma_exprs)[i](x);
    };
    return make_general(d, m, drift, sigma, name);
  }
  throw Error(ErrorKind::config, cfg.source() + ": [" + section + "] unknown kind '" + kind + "'");
}

SimConfig sim_config_from(const Config& cfg, const std::string& section) {
  SimConfig s;
  s.dt = cfg.get_double(section, "dt", s.dt);
  s.n_steps = cfg.get_count(section, "n_steps", s.n_steps);
  s.n_chains = cfg.get_count(section, "n_chains", s.n_chains);
  s.burn_in_fraction = cfg.get_double(section, "burn_in_fraction", s.burn_in_fraction);
  s.thinning = cfg.get_count(section, "thinning", s.thinning);
  s.seed = cfg.get_u64("run", "seed", s.seed);
  s.blowup_radius = cfg.get_double(section, "blowup_radius", s.blowup_radius);
  if (cfg.has(section, "x0")) {
    auto x0 = cfg.get_list(section, "x0", {});
    if (cfg.has(section, "x0_sd")) {
      s.x0 = InitialCondition::normal(std::move(x0), cfg.get_double(section, "x0_sd", 1.0));
    } else {
      s.x0 = InitialCondition::at(std::move(x0));
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, cfg.source() + ": [" + section + "] " + e.what());
  }
  return s;
}

GridSpec grid_from_config(const Config& cfg, std::size_t dim, double lower, double upper,
                          std::size_t nodes) {
  auto lo = cfg.get_list("grid", "lower", {lower});
  auto hi = cfg.get_list("grid", "upper", {upper});
  const std::size_t n = cfg.get_count("grid", "nodes", nodes);
  if (lo.size() == 1) lo.assign(dim, lo.front());
  if (hi.size() == 1) hi.assign(dim, hi.front());
  if (lo.size() != dim || hi.size() != dim) {
    throw Error(ErrorKind::config, cfg.source() + ": [grid] lower/upper need 1 or d entries");
  }
  try {
    return GridSpec(Box{lo, hi}, std::vector<std::size_t>(dim, n));
  } catch (const Error& e) {
    throw Error(ErrorKind::config, cfg.source() + ": [grid] " + e.what());
  }
}

}  // namespace ergoinv
