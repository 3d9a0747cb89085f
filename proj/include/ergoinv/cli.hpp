#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ergoinv/error.hpp"

namespace ergoinv::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_other = 1,
  exit_config = 2,
  exit_numerical_domain = 3,  // coefficient, truncation, invalid family, precondition
  exit_divergence = 4,
  exit_insufficient_support = 5,
  exit_acceptance_failure = 6,
};

int exit_code(ErrorKind kind) noexcept;

struct Options {
  std::string command;  // simulate, density, invert, counterexample, spde, acceptance
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "runs";
  std::optional<std::uint64_t> seed;
  bool quick = false;
};

struct Outcome {
  int exit_code = exit_ok;
  std::filesystem::path run_dir;  // empty when nothing was committed
};

// Runs one subcommand. Progress goes to `out`, diagnostics to `err`; errors
// are mapped to exit codes and never escape.
Outcome run(const Options& opts, std::ostream& out, std::ostream& err);

// Parses argv and dispatches to run().
int main(int argc, char** argv);

}  // namespace ergoinv::cli
