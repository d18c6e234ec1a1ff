#pragma once

namespace bridgestop::classical {

/**
 * Boundary constant B of the known-pinning-time problem: the positive root of
 *   sqrt(2 pi) (1 - B^2) exp(B^2 / 2) Phi(B) = B.
 * Computed once (bracket [0.5, 1.0]) and cached.
 */
double solve_B();

/// Left minus right side of the defining equation of B.
double b_equation_residual(double b);

/// Known pinning time T: optimal boundary B sqrt(T - t) and value V^T(t, x).
class ClassicalSolution {
public:
  /// Throws DomainError unless T > 0.
  explicit ClassicalSolution(double T);

  double T() const { return T_; }
  double B() const { return B_; }

  /// b^T(t) = B sqrt(T - t); 0 at t = T.
  double boundary(double t) const;

  /**
   * V^T(t, x) for 0 <= t <= T. At t = T the limit max(x, 0) is returned
   * (in particular V^T(T, 0) = 0). Throws DomainError for t > T or t < 0.
   */
  double value(double t, double x) const;

private:
  double T_;
  double B_;
};

/// Convenience form of ClassicalSolution(T).value(t, x).
double value_classical(double T, double t, double x);

}  // namespace bridgestop::classical
