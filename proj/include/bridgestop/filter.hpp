#pragma once

#include <functional>
#include <limits>

#include "bridgestop/priors.hpp"

namespace bridgestop::filter {

/// Observation state (t, X_t = x) of a bridge started at kappa, with its prior.
struct PosteriorState {
  double t = 0.0;
  double x = 0.0;
  Prior prior;
  double kappa = 0.0;
};

enum class DriftRoute { quadrature, gamma_closed, beta_closed };

const char* to_string(DriftRoute route);

/// Conditional drift factor f(t, x) and the filtered drift -x f(t, x).
struct DriftEval {
  double f_value = 0.0;
  double drift = 0.0;
  DriftRoute route = DriftRoute::quadrature;
  /// Only set when x == 0 and f is infinite: lim_{x -> 0+} of -x f(t, x).
  /// The limit from the left is its negative.
  double drift_limit_right = std::numeric_limits<double>::quiet_NaN();

  bool is_infinite() const { return f_value == std::numeric_limits<double>::infinity(); }
};

/**
 * Posterior law of theta given survival to t and X_t = x.
 *
 * All integrals over r in (t, T) use r = t + s^2 on the lower half of the
 * range (the weight sqrt(r / (r - t)) is then smooth) and, for bounded
 * support, w = (T - r)^gamma on the upper half so beta-type endpoint
 * singularities disappear. The constant factor exp(-x^2/(2t) + x kappa/t) of
 * the likelihood is dropped since it cancels in every ratio.
 */
class Posterior {
public:
  /// Throws DomainError unless 0 < t < T and the prior has a density.
  explicit Posterior(PosteriorState state);

  const PosteriorState& state() const { return state_; }

  /// Normalized posterior density at r (0 for r <= t or beyond the support).
  double density(double r) const;

  /// E[h(theta) | F_t, t < theta]. h receives (r, r - t).
  double expectation(const std::function<double(double r, double r_minus_t)>& h) const;

  double mean() const;

  /// Unnormalized mass: int sqrt(r/(r-t)) exp(...) mu(dr) with the constant factor removed.
  double normalizer() const { return normalizer_; }

private:
  PosteriorState state_;
  double normalizer_ = 0.0;
};

/// Normalized posterior density at r; builds the normalizer on every call.
double posterior_density(const PosteriorState& state, double r);

/**
 * f(t, x) = int (r - t)^{-1} mu_{t,x}(dr) by quadrature, for any prior with a
 * density and any kappa. When x == 0 and mu(t) > 0 the integral diverges:
 * the result is then +inf together with the numerically evaluated one-sided
 * drift limit.
 */
DriftEval f_general(const PosteriorState& state);

/**
 * Closed form for Gamma(n - 1/2, beta) priors with kappa = 0:
 * f = sqrt(2 beta) Q(t, x) / |x| with Q a ratio of half-integer Bessel K sums.
 */
DriftEval f_gamma(int n, double beta, double t, double x);

/// Q(t, x) of the gamma closed form; Q(t, 0) returns the x -> 0 limit.
double gamma_q(int n, double beta, double t, double x);

/**
 * Closed form for Beta(1/2, beta) priors with kappa = 0:
 * f = g(x / sqrt(1 - t)) / (1 - t), g(z) = U(beta, 3/2, z^2/2) / U(beta, 1/2, z^2/2).
 * Requires 0 <= t < 1.
 */
DriftEval f_beta(double beta, double t, double x);

/// g(z) of the beta closed form (z != 0). beta == 1/2 uses the normal-tail form.
double beta_g(double beta, double z);

/// |z| g(z), finite for every z; the z -> 0 value is beta_zg_limit(beta).
double beta_zg(double beta, double z);

/// lim_{z -> 0} |z| g(z) = sqrt(2) Gamma(beta + 1/2) / Gamma(beta).
double beta_zg_limit(double beta);

/// Closed form when available (kappa == 0, gamma or beta family), quadrature otherwise.
DriftEval drift(const Prior& prior, double t, double x, double kappa = 0.0);

/**
 * Elastic killing rate q(t) at zero. Closed forms for Gamma(1/2, beta)
 * (sqrt(2 beta)) and Beta(1/2, beta) priors; quadrature otherwise.
 * Throws DomainError unless t lies strictly inside the support.
 */
double killing_rate(const Prior& prior, double t);

/// Quadrature route of killing_rate for any prior with a density.
double killing_rate_quadrature(const Prior& prior, double t);

}  // namespace bridgestop::filter
