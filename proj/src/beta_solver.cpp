#include "bridgestop/beta_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bridgestop/errors.hpp"
#include "bridgestop/filter.hpp"
#include "bridgestop/numerics.hpp"

namespace bridgestop::beta_solver {

using numerics::kPi;

void BetaSolverOptions::validate() const {
  if (!(epsilon > 0.0) || !(z_max > 1.0) || !(epsilon < 1e-2)) {
    throw DomainError("beta solver: need 0 < epsilon < 1e-2 and z_max > 1");
  }
  if (nodes < 16) throw DomainError("beta solver: need at least 16 nodes");
  if (!(ode_rel_tol > 0.0) || !(ode_abs_tol > 0.0)) {
    throw DomainError("beta solver: ODE tolerances must be positive");
  }
}

// ---------------------------------------------------------------------------

HermiteTable::HermiteTable(std::vector<double> z, std::vector<double> u, std::vector<double> du,
                           std::vector<double> d2u)
    : z_(std::move(z)), u_(std::move(u)), du_(std::move(du)), d2u_(std::move(d2u)) {
  if (z_.size() < 2 || u_.size() != z_.size() || du_.size() != z_.size() ||
      d2u_.size() != z_.size()) {
    throw DomainError("HermiteTable: inconsistent sizes");
  }
  for (std::size_t i = 1; i < z_.size(); ++i) {
    if (!(z_[i] > z_[i - 1])) throw DomainError("HermiteTable: nodes must be ascending");
  }
}

double HermiteTable::eval(double z, int order) const {
  if (z < z_.front() || z > z_.back()) throw DomainError("HermiteTable: z outside the table");
  auto it = std::upper_bound(z_.begin(), z_.end(), z);
  std::size_t i = it == z_.begin() ? 0 : static_cast<std::size_t>(it - z_.begin()) - 1;
  i = std::min(i, z_.size() - 2);
  const double h = z_[i + 1] - z_[i];
  const double t = (z - z_[i]) / h;
  const double dy = u_[i + 1] - u_[i];
  const double d0 = h * du_[i];
  const double d1 = h * du_[i + 1];
  const double s0 = h * h * d2u_[i];
  const double s1 = h * h * d2u_[i + 1];
  const double c0 = u_[i];
  const double c1 = d0;
  const double c2 = 0.5 * s0;
  const double c3 = 10.0 * dy - 6.0 * d0 - 4.0 * d1 - 1.5 * s0 + 0.5 * s1;
  const double c4 = -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 1.5 * s0 - s1;
  const double c5 = 6.0 * dy - 3.0 * d0 - 3.0 * d1 - 0.5 * s0 + 0.5 * s1;
  switch (order) {
    case 0:
      return c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
    case 1:
      return (c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))) / h;
    case 2:
      return (2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5))) / (h * h);
    default:
      throw DomainError("HermiteTable: derivative order must be 0, 1 or 2");
  }
}

// ---------------------------------------------------------------------------

double ode_drift(double beta, double z) { return z - 2.0 * filter::beta_zg(beta, z); }

double FundamentalPair::psi_at(double z, int order) const {
  if (z > z_max) throw DomainError("psi: z beyond z_max");
  return psi.eval(z, order);
}

double FundamentalPair::phi_at(double z, int order) const {
  if (z <= z_max) return phi.eval(z, order);
  // Decaying branch: phi ~ c / z.
  const double c = phi.eval(z_max) * z_max;
  switch (order) {
    case 0:
      return c / z;
    case 1:
      return -c / (z * z);
    case 2:
      return 2.0 * c / (z * z * z);
    default:
      throw DomainError("phi: derivative order must be 0, 1 or 2");
  }
}

double FundamentalPair::wronskian(double z) const {
  return phi_at(z) * psi_at(z, 1) - phi_at(z, 1) * psi_at(z);
}

namespace {

/// Adds the extrapolated z = 0 node and rescales so that u(0) = 1.
HermiteTable build_table(const std::vector<double>& z, std::vector<double> u,
                         std::vector<double> du, const std::vector<double>& drift,
                         double drift0) {
  const std::size_t n = z.size();
  std::vector<double> d2u(n);
  for (std::size_t i = 0; i < n; ++i) d2u[i] = u[i] - drift[i] * du[i];
  const double eps = z.front();
  const double u0 = u[0] - eps * du[0] + 0.5 * eps * eps * d2u[0];
  const double du0 = du[0] - eps * d2u[0];
  const double d2u0 = u0 - drift0 * du0;

  std::vector<double> zz{0.0};
  zz.insert(zz.end(), z.begin(), z.end());
  u.insert(u.begin(), u0);
  du.insert(du.begin(), du0);
  d2u.insert(d2u.begin(), d2u0);
  for (std::size_t i = 0; i <= n; ++i) {
    u[i] /= u0;
    du[i] /= u0;
    d2u[i] /= u0;
  }
  return HermiteTable(std::move(zz), std::move(u), std::move(du), std::move(d2u));
}

}  // namespace

FundamentalPair compute_fundamental_pair(double beta, const BetaSolverOptions& options) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta solver: beta must be positive");
  options.validate();
  const double eps = options.epsilon;
  const double zmax = options.z_max;
  const int n = options.nodes;

  // Chebyshev-Lobatto nodes, ascending, with exact end points.
  std::vector<double> z(n);
  const double mid = 0.5 * (zmax + eps);
  const double half = 0.5 * (zmax - eps);
  for (int k = 0; k < n; ++k) z[k] = mid - half * std::cos(kPi * k / (n - 1));
  z.front() = eps;
  z.back() = zmax;

  std::vector<double> drift(n);
  for (int k = 0; k < n; ++k) drift[k] = ode_drift(beta, z[k]);
  const double drift0 = ode_drift(beta, 0.0);

  const numerics::OdeRhs rhs = [beta](double zz, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = y[0] - ode_drift(beta, zz) * y[1];
  };
  numerics::OdeOptions ode;
  ode.rel_tol = options.ode_rel_tol;
  ode.abs_tol = options.ode_abs_tol;

  // psi: psi(0) = 1, psi'(0) = 0, hence psi''(0) = 1.
  const auto fwd = numerics::ode_integrate(rhs, eps, zmax, {1.0 + 0.5 * eps * eps, eps}, z, ode);

  // phi: decaying root of r^2 + a r - 1 = 0 at z_max.
  const double a = drift.back();
  const double slope = 0.5 * (-a - std::sqrt(a * a + 4.0));
  std::vector<double> z_desc(z.rbegin(), z.rend());
  const auto bwd = numerics::ode_integrate(rhs, zmax, eps, {1.0, slope}, z_desc, ode);

  if (fwd.y.size() != z.size() || bwd.y.size() != z.size()) {
    throw InternalError("beta solver: integrator returned an unexpected number of nodes");
  }
  std::vector<double> psi(n), dpsi(n), phi(n), dphi(n);
  for (int k = 0; k < n; ++k) {
    psi[k] = fwd.y[k][0];
    dpsi[k] = fwd.y[k][1];
    phi[k] = bwd.y[n - 1 - k][0];
    dphi[k] = bwd.y[n - 1 - k][1];
  }

  FundamentalPair pair;
  pair.beta = beta;
  pair.epsilon = eps;
  pair.z_max = zmax;
  pair.psi = build_table(z, psi, dpsi, drift, drift0);
  pair.phi = build_table(z, phi, dphi, drift, drift0);

  for (int k = 0; k < n; ++k) {
    if (!(pair.psi.values()[k + 1] > 0.0) || !(pair.psi.slopes()[k + 1] > 0.0)) {
      throw ConfigurationError("beta solver: psi is not positive increasing; reduce epsilon");
    }
    if (!(pair.phi.values()[k + 1] > 0.0) || !(pair.phi.slopes()[k + 1] < 0.0)) {
      throw ConfigurationError("beta solver: phi is not positive decreasing; increase z_max");
    }
  }
  return pair;
}

// ---------------------------------------------------------------------------

double kink_coefficient(double beta) {
  return 2.0 * numerics::kSqrt2Pi * std::exp(-numerics::log_beta_function(0.5, beta));
}

double p_function(const FundamentalPair& pair, double z) {
  return (z * pair.psi_at(z, 1) - pair.psi_at(z)) / (z * pair.phi_at(z, 1) - pair.phi_at(z));
}

double BetaSolution::u(double z, int order) const {
  if (order < 0 || order > 2) throw DomainError("u: derivative order must be 0, 1 or 2");
  if (z < 0.0) {
    const double sign = order == 1 ? -1.0 : 1.0;
    return sign * (C + D) * pair->phi_at(-z, order);
  }
  if (z >= A) return order == 0 ? z : (order == 1 ? 1.0 : 0.0);
  return C * pair->psi_at(z, order) + D * pair->phi_at(z, order);
}

BetaSolution solve_A(std::shared_ptr<const FundamentalPair> pair) {
  if (!pair) throw DomainError("solve_A: missing fundamental pair");
  BetaSolution sol;
  sol.beta = pair->beta;
  sol.alpha = kink_coefficient(sol.beta);
  const double dpsi0 = pair->psi_slope_at_zero();
  const double dphi0 = pair->phi_slope_at_zero();
  sol.K = (dpsi0 + dphi0 - sol.alpha) / (2.0 * dphi0 - sol.alpha);
  if (!(sol.K <= 1.0)) throw InternalError("solve_A: K exceeds 1");

  auto h = [&](double z) { return p_function(*pair, z) - sol.K; };
  const double lo = std::min(1e-3, 0.5 * pair->z_max);
  if (!(h(lo) > 0.0)) throw InternalError("solve_A: p(0+) does not exceed K");
  double hi = 0.5;
  while (h(hi) > 0.0) {
    if (hi >= pair->z_max) throw ConfigurationError("solve_A: no root of p - K below z_max");
    hi = std::min(2.0 * hi, pair->z_max);
  }
  const double A = numerics::find_root_monotone(h, numerics::RootBracket{lo, hi, 1e-14});
  sol.A = A;

  const double ps = pair->psi_at(A);
  const double dps = pair->psi_at(A, 1);
  const double ph = pair->phi_at(A);
  const double dph = pair->phi_at(A, 1);
  const double det = ps * dph - ph * dps;
  sol.C = (A * dph - ph) / det;
  sol.D = (ps - A * dps) / det;
  sol.pair = std::move(pair);
  return sol;
}

BetaSolution solve_A(double beta, const BetaSolverOptions& options) {
  return solve_A(std::make_shared<const FundamentalPair>(compute_fundamental_pair(beta, options)));
}

double value_beta(const BetaSolution& sol, double t, double x) {
  if (t == 1.0 && x == 0.0) return 0.0;
  if (!(t >= 0.0) || !(t < 1.0)) throw DomainError("value_beta: t must lie in [0, 1)");
  const double root = std::sqrt(1.0 - t);
  return root * sol.u(x / root);
}

double boundary_beta(const BetaSolution& sol, double t) {
  if (!(t >= 0.0) || !(t <= 1.0)) throw DomainError("boundary_beta: t must lie in [0, 1]");
  return sol.A * std::sqrt(1.0 - t);
}

double BetaResiduals::max() const {
  return std::max({value_matching, smooth_pasting, kink, continuity, interior_ode, p_equation});
}

BetaResiduals verify_residuals(const BetaSolution& sol, int interior_points) {
  const auto& pair = *sol.pair;
  BetaResiduals r;
  const double A = sol.A;
  r.value_matching = std::abs(sol.C * pair.psi_at(A) + sol.D * pair.phi_at(A) - A);
  r.smooth_pasting = std::abs(sol.C * pair.psi_at(A, 1) + sol.D * pair.phi_at(A, 1) - 1.0);
  const double u0 = sol.u(0.0);
  r.kink = std::abs(sol.u(0.0, 1) + (sol.C + sol.D) * pair.phi_at(0.0, 1) - sol.alpha * u0);
  r.continuity = std::abs(u0 - (sol.C + sol.D) * pair.phi_at(0.0));
  r.p_equation = std::abs(p_function(pair, A) - sol.K);
  const double lo = pair.epsilon;
  for (int i = 0; i < interior_points; ++i) {
    // Irrational offsets keep the points away from the interpolation nodes.
    const double w = (i + 0.5 + 0.1 * std::sqrt(2.0)) / (interior_points + 1);
    const double z = lo + (A - lo) * w;
    const double res = sol.u(z, 2) + ode_drift(sol.beta, z) * sol.u(z, 1) - sol.u(z);
    r.interior_ode = std::max(r.interior_ode, std::abs(res));
  }
  return r;
}

ConvergenceCheck check_convergence(double beta, const BetaSolverOptions& options, double tol) {
  ConvergenceCheck out;
  out.A = solve_A(beta, options).A;
  BetaSolverOptions refined = options;
  refined.z_max *= 2.0;
  refined.epsilon *= 0.5;
  refined.nodes *= 2;
  out.A_refined = solve_A(beta, refined).A;
  out.delta = std::abs(out.A_refined - out.A);
  out.passed = out.delta <= tol;
  return out;
}

void write_value_csv(std::ostream& out, const BetaSolution& sol, double t, double x_lo,
                     double x_hi, int points) {
  if (points < 2 || !(x_hi > x_lo)) throw DomainError("write_value_csv: invalid grid");
  const auto precision = out.precision(12);
  out << "x,V\n";
  for (int i = 0; i < points; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (points - 1);
    out << x << ',' << value_beta(sol, t, x) << '\n';
  }
  out.precision(precision);
}

}  // namespace bridgestop::beta_solver
