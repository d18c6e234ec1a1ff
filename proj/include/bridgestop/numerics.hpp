#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bridgestop/errors.hpp"

/**
 * Numerical kernel shared by every other module: normal distribution
 * helpers, half-integer Bessel K, Tricomi's U, adaptive Gauss-Kronrod
 * quadrature, bracketed root finding and an embedded Runge-Kutta integrator.
 *
 * Every routine here is a pure function.
 */
namespace bridgestop::numerics {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt2Pi = 2.50662827463100050241576528481104525;

// ---------------------------------------------------------------------------
// Normal distribution

/// Standard normal cumulative distribution function.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), without cancellation for large x.
double normal_sf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Mills ratio R(w) = (1 - Phi(w)) / phi(w). Finite for every real w; uses a
/// continued fraction for w > 5 where both numerator and denominator underflow.
double mills_ratio(double w);

/// exp(x^2 / 2) * Phi(x), stable for very negative x.
double scaled_normal_cdf(double x);

// ---------------------------------------------------------------------------
// Special functions

/// K_{m + 1/2}(x) for integer m >= 0 and x > 0.
double bessel_k_half(int order_index, double x);

/// exp(x) * K_{m + 1/2}(x); avoids underflow for large x.
double bessel_k_half_scaled(int order_index, double x);

/**
 * Tricomi's confluent hypergeometric function U(p, q, y) for p > 0, y > 0,
 * from the integral representation
 *
 *   U(p, q, y) = 1/Gamma(p) * int_0^inf u^{p-1} (1 + u)^{q-p-1} exp(-y u) du.
 *
 * The integral is split at u = 1. On (0, 1) the factor u^{p-1} is removed by
 * u = w^{1/p} when p < 1; on (1, inf) the substitution u = e^s turns the slowly
 * decaying tail (small y) into a smooth integrand with a double-exponential
 * cutoff.
 */
double tricomi_u(double p, double q, double y);

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;

  /// Throws DomainError when a tolerance is not strictly positive.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

using ScalarFn = std::function<double(double)>;

/**
 * Globally adaptive 21-point Gauss-Kronrod quadrature of f over (a, b).
 * b may be +infinity, handled with x = a + v / (1 - v), v in (0, 1).
 * Stops once the summed error estimate is below max(abs_tol, rel_tol * |I|).
 *
 * Throws ConvergenceError (carrying the best estimate) if the subdivision
 * budget is exhausted.
 */
QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b,
                                    const QuadratureSpec& spec = {});

/// Convenience wrapper returning only the value.
double integrate(const ScalarFn& f, double a, double b, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Root finding

struct RootBracket {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-12;
};

/**
 * Root of a continuous function with a sign change on [lo, hi].
 * Brent's method: inverse quadratic / secant steps safeguarded by bisection,
 * so the bracket always shrinks. Returns once the bracket is narrower than
 * tol or f vanishes exactly.
 *
 * Throws BracketError if f(lo) and f(hi) have the same strict sign.
 */
double find_root_monotone(const ScalarFn& f, const RootBracket& bracket);

// ---------------------------------------------------------------------------
// ODE integration

/// dy/dz = rhs(z, y), written into dydz.
using OdeRhs = std::function<void(double z, std::span<const double> y, std::span<double> dydz)>;

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;   ///< 0 selects |z1 - z0| / 100
  double min_step = 1e-13;     ///< relative to max(1, |z|)
  long max_steps = 5'000'000;
};

struct OdeTrajectory {
  std::vector<double> z;                 ///< output nodes, in integration order
  std::vector<std::vector<double>> y;    ///< state at each node
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/**
 * Dormand-Prince 5(4) integration of y' = rhs(z, y) from z0 to z1 (either
 * direction). Steps land exactly on each requested output node, so the
 * returned states carry the full local accuracy. nodes must lie in [z0, z1]
 * and be monotone in the direction of integration; z0 itself may be listed.
 * When nodes is empty every accepted step is recorded.
 *
 * Throws StiffnessError on step-size underflow or a non-finite state.
 */
OdeTrajectory ode_integrate(const OdeRhs& rhs, double z0, double z1, std::vector<double> state0,
                            std::span<const double> nodes, const OdeOptions& options = {});

/// Single-tolerance form: rel_tol = abs_tol = step_tol.
OdeTrajectory ode_integrate(const OdeRhs& rhs, double z0, double z1, std::vector<double> state0,
                            double step_tol);

// ---------------------------------------------------------------------------
// Misc

/// log B(a, b) via lgamma.
double log_beta_function(double a, double b);

/// splitmix64 mixing of (seed, index); used to derive independent sub-streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace bridgestop::numerics
