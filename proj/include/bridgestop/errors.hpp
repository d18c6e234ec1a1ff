#pragma once

#include <stdexcept>
#include <string>

namespace bridgestop {

/// Argument outside the domain of a function (x <= 0 for Bessel K, t >= T, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of subdivisions. Carries the best estimate so
/// far so callers may decide to accept it.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double best_estimate_;
  double error_estimate_;
};

/// Root bracket without a sign change.
class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// ODE step size underflow or non-finite state.
class StiffnessError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Solver configuration cannot produce a valid result (e.g. z_max too small).
class ConfigurationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A mathematical invariant that must hold was violated.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace bridgestop
