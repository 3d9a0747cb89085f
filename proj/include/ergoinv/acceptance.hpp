#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergoinv/grid.hpp"
#include "ergoinv/simulate.hpp"

namespace ergoinv {

struct AcceptanceCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=" or ">="
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<AcceptanceCheck> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;
  bool pass = false;
  bool advisory = false;  // quick mode: verdict is informational only
  std::string error;      // set when the criterion threw
};

// Named tolerances, e.g. "c1.ks" -> 0.02. Every criterion threshold lives here.
std::map<std::string, double> default_tolerances();

struct AcceptanceOptions {
  bool quick = false;
  std::uint64_t seed = kDefaultSeed;
  std::map<std::string, double> tolerance_overrides;
  std::vector<int> criteria;  // empty: all ten
  Exec exec = Exec::parallel;
};

struct AcceptanceSummary {
  std::vector<CriterionResult> results;
  std::map<std::string, double> tolerances;
  bool quick = false;
  bool all_pass() const;
};

// Runs the acceptance criteria; `on_result` is called after each criterion.
AcceptanceSummary run_acceptance(const AcceptanceOptions& opts,
                                 const std::function<void(const CriterionResult&)>& on_result = {});

// One line per criterion: "[PASS] 1 <title> | check=value<=limit ...".
std::string format_result(const CriterionResult& r);

nlohmann::json to_json(const CriterionResult& r);
nlohmann::json to_json(const AcceptanceSummary& s);

}  // namespace ergoinv
