#pragma once

#include <iosfwd>
#include <vector>

namespace bridgestop::gamma_solver {

/// Solution for a Gamma(1/2, beta) prior: the bridge behaves like a Brownian
/// motion with drift -sqrt(2 beta) sgn(x), killed elastically at zero, and the
/// optimal rule is the constant threshold b.
struct GammaSolution {
  double beta = 0.5;
  double b = 0.5;

  /// sqrt(2 beta), the bang-bang drift magnitude and killing rate.
  double rate() const;
};

/// b = 1 / (2 sqrt(2 beta)). Throws DomainError for beta <= 0.
GammaSolution solve_gamma(double beta);

/// V(x) = b/e for x <= 0, b e^{x/b - 1} on (0, b), x for x >= b.
double value_gamma(const GammaSolution& sol, double x);

/// V'(x). At x == 0 the right derivative is returned.
double value_gamma_derivative(const GammaSolution& sol, double x);

/// One-sided derivatives at zero.
double value_gamma_derivative_left(const GammaSolution& sol, double x);

/// V''(x) away from 0 and b.
double value_gamma_second_derivative(const GammaSolution& sol, double x);

struct FbpResiduals {
  double interior_negative = 0.0;  ///< max |V''/2 + sqrt(2 beta) V'| on a grid of (-L, 0)
  double interior_positive = 0.0;  ///< max |V''/2 - sqrt(2 beta) V'| on a grid of (0, b)
  double value_matching = 0.0;     ///< |V(b) - b|
  double smooth_pasting = 0.0;     ///< |V'(b-) - 1|
  double continuity_at_zero = 0.0; ///< |V(0+) - V(0-)|
  double kink = 0.0;               ///< |V'(0+) - V'(0-) - 2 sqrt(2 beta) V(0)|

  double max() const;
};

/// Residuals of the free-boundary system, interior ones evaluated by the
/// analytic derivatives on `grid_points` points per side.
FbpResiduals verify_fbp_residuals(const GammaSolution& sol, int grid_points = 1000);

/// CSV rows (x, V(x)) on an equispaced grid.
void write_value_csv(std::ostream& out, const GammaSolution& sol, double x_lo, double x_hi,
                     int points);

}  // namespace bridgestop::gamma_solver
