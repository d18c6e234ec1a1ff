#pragma once

// Finite-difference oracle for the free boundary under the beta(1/2, 1/2)
// prior. Independent of the library: own drift (via erfc), own kink constant,
// no shooting and no Hermite tables.
//
// With V(t,x) = sqrt(1-t) u(s, x / sqrt(1-t)), s = -log(1-t), the backward
// equation turns into a heat-type problem in pseudo-time whose steady state
// is the free boundary problem for u. Implicit Euler steps with Brennan-Schwartz
// projection onto u >= z; the pinning mass at z = 0 enters through one
// finite-volume cell. Robin condition u' = u/|z| on the left (u ~ c/|z|),
// Dirichlet u = z on the right inside the stopping region.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

struct PdeResult {
  double A = 0.0;
  double u0 = 0.0;  // u(0) = V(0, 0)
  int steps = 0;
};

namespace detail {

// z - 2 z g(z) with g(z) = 1 / (z R(z)), R the Mills ratio; odd in z.
inline double drift_half(double z) {
  const double m = std::abs(z);
  const double mills = std::sqrt(std::numbers::pi / 2.0) * std::erfc(m / std::numbers::sqrt2) *
                       std::exp(0.5 * m * m);
  return z - std::copysign(2.0 / mills, z == 0.0 ? 1.0 : z);
}

}  // namespace detail

/// `cells` intervals on [z_lo, z_hi]; the node set must contain z = 0.
inline PdeResult pde_free_boundary_half(int cells = 2200, double z_lo = -8.0, double z_hi = 3.0,
                                        double dsigma = 0.25, double tol = 1e-13) {
  const double h = (z_hi - z_lo) / cells;
  const int zero = static_cast<int>(std::lround(-z_lo / h));
  if (std::abs(z_lo + zero * h) > 1e-12) throw std::invalid_argument("pde oracle: z = 0 must be a node");
  const int n = cells + 1;
  const double alpha = 2.0 * std::sqrt(2.0 * std::numbers::pi) / std::beta(0.5, 0.5);

  std::vector<double> z(n), lo(n, 0.0), di(n, 1.0), up(n, 0.0);
  for (int j = 0; j < n; ++j) z[j] = z_lo + j * h;
  z[zero] = 0.0;

  // Rows of I - dsigma * L / 2, L u = u'' + a u' - u - alpha delta_0 u.
  const double k = 0.5 * dsigma;
  for (int j = 1; j < n - 1; ++j) {
    double l = 1.0 / (h * h);
    double r = 1.0 / (h * h);
    double c = -2.0 / (h * h) - 1.0;
    if (j == zero) {
      const double ap = detail::drift_half(1e-300);
      const double am = -ap;
      // Half cell each side: a(0+) forward difference, a(0-) backward difference.
      r += 0.5 * ap / h;
      c += -0.5 * ap / h + 0.5 * am / h - alpha / h;
      l += -0.5 * am / h;
    } else {
      const double a = detail::drift_half(z[j]);
      r += a / (2.0 * h);
      l -= a / (2.0 * h);
    }
    lo[j] = -k * l;
    di[j] = 1.0 - k * c;
    up[j] = -k * r;
  }
  // Left: u_0 (1 + h/|z_lo|) - u_1 = 0. Right: u = z.
  di[0] = 1.0 + h / std::abs(z_lo);
  up[0] = -1.0;

  std::vector<double> u(n), rhs(n), cp(n), dp(n);
  for (int j = 0; j < n; ++j) u[j] = std::max(z[j], 0.0);
  PdeResult res;
  for (res.steps = 1; res.steps <= 200000; ++res.steps) {
    for (int j = 0; j < n; ++j) rhs[j] = u[j];
    rhs[0] = 0.0;
    rhs[n - 1] = z[n - 1];
    // Forward sweep left to right, back substitution right to left with the
    // projection, since the stopping region touches the right end.
    cp[0] = up[0] / di[0];
    dp[0] = rhs[0] / di[0];
    for (int j = 1; j < n - 1; ++j) {
      const double m = di[j] - lo[j] * cp[j - 1];
      cp[j] = up[j] / m;
      dp[j] = (rhs[j] - lo[j] * dp[j - 1]) / m;
    }
    double change = std::abs(u[n - 1] - z[n - 1]);
    u[n - 1] = z[n - 1];
    for (int j = n - 2; j >= 0; --j) {
      const double v = std::max(dp[j] - cp[j] * u[j + 1], z[j]);
      change = std::max(change, std::abs(v - u[j]));
      u[j] = v;
    }
    if (change < tol) break;
  }
  if (res.steps > 200000) throw std::runtime_error("pde oracle: no steady state");

  // The continuation gap w = u - z vanishes quadratically at A, so sqrt(w) is
  // locally linear; extrapolate its zero from the last two free nodes.
  int first = -1;
  for (int j = zero + 1; j < n; ++j) {
    if (u[j] - z[j] <= 1e-14) {
      first = j;
      break;
    }
  }
  if (first < zero + 3) throw std::runtime_error("pde oracle: no stopping region");
  const double w1 = std::sqrt(u[first - 1] - z[first - 1]);
  const double w2 = std::sqrt(u[first - 2] - z[first - 2]);
  res.A = z[first - 1] + h * w1 / (w2 - w1);
  res.u0 = u[zero];
  return res;
}

}  // namespace oracle
