#include "bridgestop/gamma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bridgestop/errors.hpp"

namespace bridgestop::gamma_solver {

double GammaSolution::rate() const { return std::sqrt(2.0 * beta); }

GammaSolution solve_gamma(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("solve_gamma: beta must be positive");
  return GammaSolution{beta, 1.0 / (2.0 * std::sqrt(2.0 * beta))};
}

double value_gamma(const GammaSolution& sol, double x) {
  const double b = sol.b;
  if (x <= 0.0) return b * std::exp(-1.0);
  if (x < b) return b * std::exp(x / b - 1.0);
  return x;
}

double value_gamma_derivative(const GammaSolution& sol, double x) {
  const double b = sol.b;
  if (x < 0.0) return 0.0;
  if (x < b) return std::exp(x / b - 1.0);
  return 1.0;
}

double value_gamma_derivative_left(const GammaSolution& sol, double x) {
  const double b = sol.b;
  if (x <= 0.0) return 0.0;
  if (x <= b) return std::exp(x / b - 1.0);
  return 1.0;
}

double value_gamma_second_derivative(const GammaSolution& sol, double x) {
  const double b = sol.b;
  if (x < 0.0 || x > b) return 0.0;
  return std::exp(x / b - 1.0) / b;
}

double FbpResiduals::max() const {
  return std::max({interior_negative, interior_positive, value_matching, smooth_pasting,
                   continuity_at_zero, kink});
}

FbpResiduals verify_fbp_residuals(const GammaSolution& sol, int grid_points) {
  if (grid_points < 2) throw DomainError("verify_fbp_residuals: need at least two grid points");
  const double c = sol.rate();
  const double b = sol.b;
  FbpResiduals r;
  auto generator = [&](double x) {
    const double sign = x > 0.0 ? 1.0 : -1.0;
    return 0.5 * value_gamma_second_derivative(sol, x) - c * sign * value_gamma_derivative(sol, x);
  };
  const double span = 10.0 * b;
  for (int i = 1; i <= grid_points; ++i) {
    const double w = static_cast<double>(i) / (grid_points + 1);
    r.interior_negative = std::max(r.interior_negative, std::abs(generator(-span * w)));
    r.interior_positive = std::max(r.interior_positive, std::abs(generator(b * w)));
  }
  r.value_matching = std::abs(value_gamma(sol, b) - b);
  r.smooth_pasting = std::abs(value_gamma_derivative_left(sol, b) - 1.0);
  const double v0_right = b * std::exp(-1.0);
  r.continuity_at_zero = std::abs(v0_right - value_gamma(sol, 0.0));
  r.kink = std::abs(value_gamma_derivative(sol, 0.0) - value_gamma_derivative_left(sol, 0.0) -
                    2.0 * c * value_gamma(sol, 0.0));
  return r;
}

void write_value_csv(std::ostream& out, const GammaSolution& sol, double x_lo, double x_hi,
                     int points) {
  if (points < 2 || !(x_hi > x_lo)) throw DomainError("write_value_csv: invalid grid");
  const auto precision = out.precision(12);
  out << "x,V\n";
  for (int i = 0; i < points; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (points - 1);
    out << x << ',' << value_gamma(sol, x) << '\n';
  }
  out.precision(precision);
}

}  // namespace bridgestop::gamma_solver
