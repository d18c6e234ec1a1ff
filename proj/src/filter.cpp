#include "bridgestop/filter.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "bridgestop/errors.hpp"
#include "bridgestop/numerics.hpp"

namespace bridgestop::filter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using numerics::kPi;

const numerics::QuadratureSpec kSpec{1e-300, 1e-12, 4000};

using WeightFn = std::function<double(double r, double r_minus_t)>;

void check_state(const PosteriorState& s) {
  if (!s.prior.has_density()) {
    throw DomainError("filter: prior has no density (point mass)");
  }
  if (!(s.t > 0.0) || !(s.t < s.prior.support_upper())) {
    throw DomainError("filter: t must lie in (0, T)");
  }
  if (!std::isfinite(s.x) || !std::isfinite(s.kappa)) {
    throw DomainError("filter: x and kappa must be finite");
  }
}

/// Likelihood weight with the r-independent factor removed; rt = r - t > 0.
double likelihood(double t, double x, double kappa, double r, double rt) {
  const double expo = -x * x / (2.0 * rt) - kappa * kappa * rt / (2.0 * t * r);
  return std::sqrt(r / rt) * std::exp(expo);
}

/**
 * int_t^T h(r, r - t) * likelihood(r) * mu(r) dr with the endpoint
 * substitutions described in the header.
 */
double posterior_integral(const Prior& prior, double t, double x, double kappa, const WeightFn& h) {
  const double T = prior.support_upper();

  // Lower piece with r = t + s^2: sqrt(r/(r-t)) dr = 2 sqrt(r) ds.
  auto lower = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double rt = s * s;
    const double r = t + rt;
    const double expo = -x * x / (2.0 * rt) - kappa * kappa * rt / (2.0 * t * r);
    if (expo < -745.0) return 0.0;
    const double mu = prior.density(r);
    if (mu == 0.0) return 0.0;
    return 2.0 * std::sqrt(r) * std::exp(expo) * mu * h(r, rt);
  };

  if (std::isinf(T)) {
    const double span = std::max(1.0, prior.mean());
    const double lower_part = numerics::integrate(lower, 0.0, std::sqrt(span), kSpec);
    auto tail = [&](double r) {
      const double rt = r - t;
      const double mu = prior.density(r);
      if (mu == 0.0) return 0.0;
      return likelihood(t, x, kappa, r, rt) * mu * h(r, rt);
    };
    return lower_part + numerics::integrate(tail, t + span, kInf, kSpec);
  }

  const double half = 0.5 * (T - t);
  const double lower_part = numerics::integrate(lower, 0.0, std::sqrt(half), kSpec);

  // Upper piece with w = (T - r)^gamma.
  const double gamma = prior.upper_endpoint_exponent();
  auto upper = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double d = std::pow(w, 1.0 / gamma);
    const double rt = (T - t) - d;
    const double r = T - d;
    if (!(rt > 0.0)) return 0.0;
    const double mu = prior.density_upper_substituted(w);
    if (mu == 0.0) return 0.0;
    return likelihood(t, x, kappa, r, rt) * mu * h(r, rt);
  };
  return lower_part + numerics::integrate(upper, 0.0, std::pow(half, gamma), kSpec);
}

const WeightFn kOne = [](double, double) { return 1.0; };
const WeightFn kInverseGap = [](double, double rt) { return 1.0 / rt; };

double f_quadrature(const PosteriorState& s, double x) {
  const double num = posterior_integral(s.prior, s.t, x, s.kappa, kInverseGap);
  const double den = posterior_integral(s.prior, s.t, x, s.kappa, kOne);
  return num / den;
}

}  // namespace

const char* to_string(DriftRoute route) {
  switch (route) {
    case DriftRoute::quadrature:
      return "quadrature";
    case DriftRoute::gamma_closed:
      return "gamma_closed";
    case DriftRoute::beta_closed:
      return "beta_closed";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

Posterior::Posterior(PosteriorState state) : state_(std::move(state)) {
  check_state(state_);
  normalizer_ = posterior_integral(state_.prior, state_.t, state_.x, state_.kappa, kOne);
  if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_)) {
    throw DomainError("filter: posterior normalizer underflowed");
  }
}

double Posterior::density(double r) const {
  const auto& s = state_;
  if (!(r > s.t) || r >= s.prior.support_upper()) return 0.0;
  return likelihood(s.t, s.x, s.kappa, r, r - s.t) * s.prior.density(r) / normalizer_;
}

double Posterior::expectation(const std::function<double(double, double)>& h) const {
  const auto& s = state_;
  return posterior_integral(s.prior, s.t, s.x, s.kappa, h) / normalizer_;
}

double Posterior::mean() const {
  return expectation([](double r, double) { return r; });
}

double posterior_density(const PosteriorState& state, double r) {
  return Posterior(state).density(r);
}

// ---------------------------------------------------------------------------

DriftEval f_general(const PosteriorState& state) {
  check_state(state);
  DriftEval out;
  out.route = DriftRoute::quadrature;
  if (state.x == 0.0 && state.prior.density(state.t) > 0.0) {
    out.f_value = kInf;
    out.drift = 0.0;
    const double delta = 1e-6 * std::sqrt(state.t);
    out.drift_limit_right = -delta * f_quadrature(state, delta);
    return out;
  }
  out.f_value = f_quadrature(state, state.x);
  out.drift = -state.x * out.f_value;
  return out;
}

// ---------------------------------------------------------------------------
// Gamma(n - 1/2, beta)

double gamma_q(int n, double beta, double t, double x) {
  if (n < 1 || !(beta > 0.0)) throw DomainError("gamma_q: requires n >= 1 and beta > 0");
  if (t < 0.0) throw DomainError("gamma_q: t must be non-negative");
  if (n == 1) return 1.0;
  const double c = std::sqrt(2.0 * beta);
  if (x == 0.0) {
    // Leading small-|x| terms: only k = n - 1 survives in the numerator.
    const double tb = t * 2.0 * beta;
    double den = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= n - 1; ++k) {
      const double nu = n - k - 0.5;
      den += binom * std::pow(tb, k) * 0.5 * std::tgamma(nu) * std::pow(2.0, nu);
      binom = binom * (n - 1 - k) / (k + 1);
    }
    return std::pow(tb, n - 1) * std::sqrt(kPi / 2.0) / den;
  }
  const double ax = std::abs(x);
  const double s = c * ax;
  const double scale = ax / c;  // terms multiplied by (|x| / sqrt(2 beta))^{n-1}
  double num = 0.0;
  double den = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= n - 1; ++k) {
    const double weight = binom * std::pow(t, k) * std::pow(scale, n - 1 - k);
    const int m_num = (n - k - 2 >= 0) ? n - k - 2 : 0;
    const int m_den = n - k - 1;
    num += weight * numerics::bessel_k_half_scaled(m_num, s);
    den += weight * numerics::bessel_k_half_scaled(m_den, s);
    binom = binom * (n - 1 - k) / (k + 1);
  }
  return num / den;
}

DriftEval f_gamma(int n, double beta, double t, double x) {
  DriftEval out;
  out.route = DriftRoute::gamma_closed;
  const double c = std::sqrt(2.0 * beta);
  if (x == 0.0) {
    out.f_value = kInf;
    out.drift = 0.0;
    out.drift_limit_right = -c * gamma_q(n, beta, t, 0.0);
    return out;
  }
  const double q = gamma_q(n, beta, t, x);
  out.f_value = c * q / std::abs(x);
  out.drift = -std::copysign(c * q, x);
  return out;
}

// ---------------------------------------------------------------------------
// Beta(1/2, beta)

double beta_zg_limit(double beta) {
  return std::sqrt(2.0) * std::exp(std::lgamma(beta + 0.5) - std::lgamma(beta));
}

double beta_zg(double beta, double z) {
  if (!(beta > 0.0)) throw DomainError("beta_g: beta must be positive");
  const double az = std::abs(z);
  if (az == 0.0) return beta_zg_limit(beta);
  if (beta == 0.5) return 1.0 / numerics::mills_ratio(az);
  const double y = 0.5 * az * az;
  return az * numerics::tricomi_u(beta, 1.5, y) / numerics::tricomi_u(beta, 0.5, y);
}

double beta_g(double beta, double z) {
  if (z == 0.0) throw DomainError("beta_g: g is infinite at z = 0");
  return beta_zg(beta, z) / std::abs(z);
}

DriftEval f_beta(double beta, double t, double x) {
  if (!(beta > 0.0)) throw DomainError("f_beta: beta must be positive");
  if (!(t >= 0.0) || !(t < 1.0)) throw DomainError("f_beta: t must lie in [0, 1)");
  DriftEval out;
  out.route = DriftRoute::beta_closed;
  const double root = std::sqrt(1.0 - t);
  if (x == 0.0) {
    out.f_value = kInf;
    out.drift = 0.0;
    out.drift_limit_right = -beta_zg_limit(beta) / root;
    return out;
  }
  const double z = x / root;
  const double zg = beta_zg(beta, z);
  out.f_value = zg / (std::abs(z) * (1.0 - t));
  out.drift = -std::copysign(zg, x) / root;
  return out;
}

DriftEval drift(const Prior& prior, double t, double x, double kappa) {
  if (kappa == 0.0) {
    if (const auto* g = std::get_if<GammaHalf>(&prior.kind())) {
      if (t < 0.0) throw DomainError("drift: t must be non-negative");
      return f_gamma(g->n, g->beta, t, x);
    }
    if (const auto* b = std::get_if<BetaHalf>(&prior.kind())) {
      return f_beta(b->beta, t, x);
    }
  }
  return f_general(PosteriorState{t, x, prior, kappa});
}

// ---------------------------------------------------------------------------

double killing_rate_quadrature(const Prior& prior, double t) {
  check_state(PosteriorState{t, 0.0, prior, 0.0});
  const double mass = posterior_integral(prior, t, 0.0, 0.0, kOne);
  return prior.density(t) * std::sqrt(2.0 * kPi * t) / mass;
}

double killing_rate(const Prior& prior, double t) {
  if (const auto* g = std::get_if<GammaHalf>(&prior.kind())) {
    if (g->n == 1) {
      if (!(t >= 0.0)) throw DomainError("killing_rate: t must be non-negative");
      return std::sqrt(2.0 * g->beta);
    }
  }
  if (const auto* b = std::get_if<BetaHalf>(&prior.kind())) {
    if (!(t >= 0.0) || !(t < 1.0)) throw DomainError("killing_rate: t must lie in [0, 1)");
    return std::sqrt(2.0 * kPi / (1.0 - t)) * std::exp(-numerics::log_beta_function(0.5, b->beta));
  }
  return killing_rate_quadrature(prior, t);
}

}  // namespace bridgestop::filter
