#pragma once

#include <stdexcept>
#include <string>

namespace ergoinv {

// Each kind maps to a distinct CLI exit code (see cli.hpp).
enum class ErrorKind {
  config,
  coefficient,      // evaluation failure or invalid coefficient domain (D <= 0, ...)
  truncation,       // truncated domain carries too much tail mass
  divergence,       // simulation blow-up
  insufficient_support,
  invalid_family,   // gauge/skew family construction rejected
  precondition,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class DivergenceError : public Error {
public:
  DivergenceError(std::size_t chain, std::size_t step, double value);
  std::size_t chain() const noexcept { return chain_; }
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t chain_;
  std::size_t step_;
};

class TruncationError : public Error {
public:
  TruncationError(double tail_mass, double tail_tol, double suggested_half_width);
  double tail_mass() const noexcept { return tail_mass_; }
  double suggested_half_width() const noexcept { return suggested_half_width_; }

private:
  double tail_mass_;
  double suggested_half_width_;
};

}  // namespace ergoinv
