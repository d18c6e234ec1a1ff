#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

namespace bridgestop::beta_solver {

struct BetaSolverOptions {
  double epsilon = 1e-6;  ///< integration starts at z = epsilon (the drift jumps at 0)
  double z_max = 8.0;     ///< right end; phi is started on its decaying branch here
  int nodes = 1200;       ///< Chebyshev-Lobatto output nodes on [epsilon, z_max]
  double ode_rel_tol = 1e-12;
  double ode_abs_tol = 1e-14;

  /// Throws DomainError for non-positive or inconsistent settings.
  void validate() const;
};

/**
 * Piecewise quintic Hermite interpolant built from (u, u', u'') at the nodes.
 * C^2 on its range; exact for quintic polynomials.
 */
class HermiteTable {
public:
  HermiteTable() = default;
  HermiteTable(std::vector<double> z, std::vector<double> u, std::vector<double> du,
               std::vector<double> d2u);

  /// Derivative of order 0, 1 or 2. z must lie in [front, back].
  double eval(double z, int order = 0) const;

  double front() const { return z_.front(); }
  double back() const { return z_.back(); }
  const std::vector<double>& nodes() const { return z_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<double>& slopes() const { return du_; }

private:
  std::vector<double> z_, u_, du_, d2u_;
};

/**
 * Increasing (psi) and decreasing (phi) positive solutions of
 *
 *   u'' + z (1 - 2 g(z)) u' - u = 0,   z > 0,
 *
 * both scaled to equal 1 at 0+. The tables start with a node at z = 0 whose
 * entries are second-order Taylor extrapolations from z = epsilon.
 *
 * psi is the solution with psi'(0+) = 0; any increasing solution spans the same
 * space together with phi, and the solved value function does not depend on
 * the choice. phi is integrated backward from z_max on its decaying branch.
 */
struct FundamentalPair {
  double beta = 0.5;
  double epsilon = 1e-6;
  double z_max = 8.0;
  HermiteTable psi;
  HermiteTable phi;

  double psi_at(double z, int order = 0) const;
  /// For z > z_max, continues phi with its algebraic 1/z decay.
  double phi_at(double z, int order = 0) const;
  double psi_slope_at_zero() const { return psi.eval(0.0, 1); }
  double phi_slope_at_zero() const { return phi.eval(0.0, 1); }
  /// phi psi' - phi' psi.
  double wronskian(double z) const;
};

/// Drift coefficient z (1 - 2 g(z)) of the ODE; its z -> 0+ limit at z == 0.
double ode_drift(double beta, double z);

/**
 * Throws StiffnessError from the integrator, or ConfigurationError if psi
 * or phi loses positivity or monotonicity on the grid.
 */
FundamentalPair compute_fundamental_pair(double beta, const BetaSolverOptions& options = {});

/**
 * Solution for a Beta(1/2, beta) prior. The optimal boundary is A sqrt(1 - t)
 * and V(t, x) = sqrt(1 - t) u(x / sqrt(1 - t)) with
 *   u(z) = (C + D) phi(-z)      z <= 0,
 *   u(z) = C psi(z) + D phi(z)  0 < z < A,
 *   u(z) = z                    z >= A.
 */
struct BetaSolution {
  double beta = 0.5;
  double A = 0.0;
  double C = 0.0;
  double D = 0.0;
  double alpha = 0.0;  ///< 2 sqrt(2 pi) / B(1/2, beta): kink coefficient
  double K = 0.0;      ///< target of p(A)
  std::shared_ptr<const FundamentalPair> pair;

  /// u and its first two derivatives; derivatives at 0 and A are one-sided from the right.
  double u(double z, int order = 0) const;
};

/// alpha = 2 sqrt(2 pi) / B(1/2, beta).
double kink_coefficient(double beta);

/// p(z) = (z psi' - psi) / (z phi' - phi).
double p_function(const FundamentalPair& pair, double z);

/**
 * Solves p(A) = K with K = (psi'(0+) + phi'(0+) - alpha) / (2 phi'(0+) - alpha),
 * expanding the bracket upward from (0, 1/2] until p crosses K, then C and D
 * from value matching and smooth pasting at A.
 * Throws DomainError for beta <= 0 and InternalError if K > 1.
 */
BetaSolution solve_A(double beta, const BetaSolverOptions& options = {});

/// Same, reusing an already computed pair.
BetaSolution solve_A(std::shared_ptr<const FundamentalPair> pair);

/// V(t, x) for 0 <= t < 1 and V(1, 0) = 0. Throws DomainError otherwise.
double value_beta(const BetaSolution& sol, double t, double x);

/// A sqrt(1 - t) for 0 <= t <= 1.
double boundary_beta(const BetaSolution& sol, double t);

struct BetaResiduals {
  double value_matching = 0.0;  ///< |u(A) - A|
  double smooth_pasting = 0.0;  ///< |u'(A-) - 1|
  double kink = 0.0;            ///< |u'(0+) - u'(0-) - alpha u(0)|
  double continuity = 0.0;      ///< |u(0+) - u(0-)|
  double interior_ode = 0.0;    ///< max |u'' + z(1-2g)u' - u| at off-node points of (epsilon, A)
  double p_equation = 0.0;      ///< |p(A) - K|

  double max() const;
};

BetaResiduals verify_residuals(const BetaSolution& sol, int interior_points = 200);

struct ConvergenceCheck {
  double A = 0.0;
  double A_refined = 0.0;  ///< with z_max doubled and epsilon halved
  double delta = 0.0;
  bool passed = false;
};

/// Re-solves with z_max doubled and epsilon halved; passes if |dA| <= tol.
ConvergenceCheck check_convergence(double beta, const BetaSolverOptions& options = {},
                                   double tol = 1e-6);

/// CSV rows (x, V(t, x)) on an equispaced grid.
void write_value_csv(std::ostream& out, const BetaSolution& sol, double t, double x_lo,
                     double x_hi, int points);

}  // namespace bridgestop::beta_solver
