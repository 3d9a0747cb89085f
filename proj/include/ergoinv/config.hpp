#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ergoinv/models.hpp"
#include "ergoinv/simulate.hpp"

namespace ergoinv {

// Flat declarative run configuration:
//
//   # comment
//   [section]
//   key = value
//
// Keys are unique within a section; errors carry "source:line" diagnostics.
class Config {
public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::size_t get_count(const std::string& section, const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               std::vector<double> fallback) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  // Rejects sections or keys outside the allowed schema.
  void require_known(const std::map<std::string, std::set<std::string>>& schema) const;

  // Sorted "section.key=value" lines; stable input for hashing.
  std::string canonical() const;
  const std::string& source() const noexcept { return source_; }
  std::vector<std::pair<std::string, std::string>> entries(const std::string& section) const;

private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const;
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, int> section_lines_;
};

// Configuration schema shared by the CLI subcommands.
const std::map<std::string, std::set<std::string>>& config_schema();

// [model]: preset = name, or kind = general|additive|langevin with
// dimension, drift ("expr; expr"), sigma ("a, b; c, d" rows), potential, beta.
CoefficientPair model_from_config(const Config& cfg, const std::string& section = "model");
// [simulate]: dt, n_steps, n_chains, burn_in_fraction, thinning, x0, x0_sd, blowup_radius.
// The seed comes from [run] seed.
SimConfig sim_config_from(const Config& cfg, const std::string& section = "simulate");
// [grid]: lower, upper (scalars or per-axis lists), nodes.
GridSpec grid_from_config(const Config& cfg, std::size_t dim, double lower, double upper,
                          std::size_t nodes);

}  // namespace ergoinv
