#include "ergoinv/error.hpp"

#include <sstream>

namespace ergoinv {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::coefficient: return "coefficient";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::insufficient_support: return "insufficient_support";
    case ErrorKind::invalid_family: return "invalid_family";
    case ErrorKind::precondition: return "precondition";
  }
  return "unknown";
}

namespace {

std::string divergence_message(std::size_t chain, std::size_t step, double value) {
  std::ostringstream os;
  os << "simulation diverged in chain " << chain << " at step " << step << " (|X| = " << value
     << ")";
  return os.str();
}

std::string truncation_message(double tail, double tol, double half_width) {
  std::ostringstream os;
  os << "estimated tail mass " << tail << " exceeds tolerance " << tol
     << "; try a domain of half-width >= " << half_width;
  return os.str();
}

}  // namespace

DivergenceError::DivergenceError(std::size_t chain, std::size_t step, double value)
    : Error(ErrorKind::divergence, divergence_message(chain, step, value)),
      chain_(chain),
      step_(step) {}

TruncationError::TruncationError(double tail_mass, double tail_tol, double suggested_half_width)
    : Error(ErrorKind::truncation, truncation_message(tail_mass, tail_tol, suggested_half_width)),
      tail_mass_(tail_mass),
      suggested_half_width_(suggested_half_width) {}

}  // namespace ergoinv
