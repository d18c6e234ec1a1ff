#include "bridgestop/classical.hpp"

#include <cmath>

#include "bridgestop/errors.hpp"
#include "bridgestop/numerics.hpp"

namespace bridgestop::classical {

using numerics::kSqrt2Pi;

double b_equation_residual(double b) {
  return kSqrt2Pi * (1.0 - b * b) * numerics::scaled_normal_cdf(b) - b;
}

double solve_B() {
  static const double B =
      numerics::find_root_monotone(b_equation_residual, numerics::RootBracket{0.5, 1.0, 1e-15});
  return B;
}

ClassicalSolution::ClassicalSolution(double T) : T_(T), B_(solve_B()) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("classical: T must be positive and finite");
}

double ClassicalSolution::boundary(double t) const {
  if (t > T_) throw DomainError("classical: t beyond the pinning time");
  return B_ * std::sqrt(T_ - t);
}

double ClassicalSolution::value(double t, double x) const {
  if (t > T_ || t < 0.0) throw DomainError("classical: t must lie in [0, T]");
  if (t == T_) return std::max(x, 0.0);
  const double tau = T_ - t;
  const double root = std::sqrt(tau);
  if (x >= B_ * root) return x;
  return kSqrt2Pi * root * (1.0 - B_ * B_) * numerics::scaled_normal_cdf(x / root);
}

double value_classical(double T, double t, double x) { return ClassicalSolution(T).value(t, x); }

}  // namespace bridgestop::classical
