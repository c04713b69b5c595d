#ifndef FISE_ERRORS_HPP
#define FISE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fise {

/// Bad grid dimensions, mask geometry, or run configuration.
struct config_error : std::invalid_argument {
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Overflow/underflow of amplitudes or a quadrature that cannot reach tolerance.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Iteration limit hit, or no sign-change bracket found for a root search.
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// No time window with a stable instantaneous decay rate exists in a trace.
struct no_plateau_error : std::runtime_error {
  explicit no_plateau_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fise

#endif
