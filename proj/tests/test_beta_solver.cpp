#include <doctest.h>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <map>
#include <memory>

#include "bridgestop/beta_solver.hpp"
#include "bridgestop/classical.hpp"
#include "bridgestop/errors.hpp"
#include "oracles/pde_oracle.hpp"

using namespace bridgestop;
using namespace bridgestop::beta_solver;

namespace {

using State = std::array<double, 2>;

/// Integrates u'' + a(z) u' - u = 0 with Boost.Odeint's Dormand-Prince stepper.
State odeint_solve(double beta, State y, double z0, double z1) {
  namespace ode = boost::numeric::odeint;
  auto rhs = [beta](const State& s, State& ds, double z) {
    // g is even, so the drift z (1 - 2 g) is odd.
    const double a = z >= 0.0 ? ode_drift(beta, z) : -ode_drift(beta, -z);
    ds[0] = s[1];
    ds[1] = s[0] - a * s[1];
  };
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, rhs, y, z0, z1, (z1 - z0) / 1000.0);
  return y;
}

/**
 * Independent boundary constant: phi'(0)/phi(0) from a backward sweep on the
 * decaying branch, then for each trial A the solution through (A, A, 1) is
 * carried back to 0 and the kink condition is solved for A with TOMS748.
 */
double shooting_A(double beta) {
  const double zmax = 8.0;
  const double a = ode_drift(beta, zmax);
  const State phi0 = odeint_solve(beta, {1.0, 0.5 * (-a - std::sqrt(a * a + 4.0))}, zmax, 0.0);
  const double phi_log_slope = phi0[1] / phi0[0];
  const double alpha = kink_coefficient(beta);
  auto kink = [&](double A) {
    const State u0 = odeint_solve(beta, {A, 1.0}, A, 0.0);
    // u'(0-) = -u(0) phi'(0) / phi(0) for the reflected decaying branch.
    return u0[1] + u0[0] * phi_log_slope - alpha * u0[0];
  };
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t iters = 100;
  const auto r = boost::math::tools::toms748_solve(kink, 0.05, 1.5, tol, iters);
  return 0.5 * (r.first + r.second);
}

const BetaSolution& solution(double beta) {
  static std::map<double, BetaSolution> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, solve_A(beta)).first;
  return it->second;
}

}  // namespace

TEST_CASE("quintic Hermite table is exact for quintics") {
  auto p = [](double z) { return 1.0 - 2.0 * z + 0.5 * z * z * z - 0.1 * std::pow(z, 5); };
  auto dp = [](double z) { return -2.0 + 1.5 * z * z - 0.5 * std::pow(z, 4); };
  auto d2p = [](double z) { return 3.0 * z - 2.0 * std::pow(z, 3); };
  std::vector<double> z{0.0, 0.3, 1.1, 2.0};
  std::vector<double> u, du, d2u;
  for (double v : z) {
    u.push_back(p(v));
    du.push_back(dp(v));
    d2u.push_back(d2p(v));
  }
  const HermiteTable table(z, u, du, d2u);
  for (double v : {0.0, 0.1, 0.77, 1.5, 2.0}) {
    CHECK(table.eval(v) == doctest::Approx(p(v)).epsilon(1e-13));
    CHECK(table.eval(v, 1) == doctest::Approx(dp(v)).epsilon(1e-12));
    CHECK(table.eval(v, 2) == doctest::Approx(d2p(v)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(table.eval(2.5), DomainError);
  CHECK_THROWS_AS(HermiteTable({1.0, 0.0}, {0, 0}, {0, 0}, {0, 0}), DomainError);
}

TEST_CASE("fundamental pair") {
  for (double beta : {0.25, 0.5, 1.0, 2.0}) {
    const auto& pair = *solution(beta).pair;
    CHECK(pair.psi_at(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pair.phi_at(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pair.psi_at(pair.epsilon) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pair.phi_at(pair.epsilon) == doctest::Approx(1.0).epsilon(1e-5));
    const double w0 = pair.wronskian(0.01);
    for (int i = 1; i <= 200; ++i) {
      const double z = pair.epsilon + (pair.z_max - pair.epsilon) * (i - 0.5) / 200.0;
      CHECK(pair.psi_at(z, 1) > 0.0);
      CHECK(pair.phi_at(z, 1) < 0.0);
      CHECK(pair.phi_at(z) > 0.0);
      CHECK(pair.wronskian(z) > 0.0);
    }
    // Abel: W(z) = W(z0) exp(-int_{z0}^{z} a).
    for (double z : {0.5, 1.0, 2.0}) {
      double integral = 0.0;
      const int steps = 2000;
      const double h = (z - 0.01) / steps;
      for (int k = 0; k < steps; ++k) {
        const double m = 0.01 + (k + 0.5) * h;
        integral += h * ode_drift(beta, m);  // midpoint rule, fine for a smooth drift
      }
      CHECK(pair.wronskian(z) / w0 == doctest::Approx(std::exp(-integral)).epsilon(1e-6));
    }
    // phi continues with 1/z decay beyond z_max.
    CHECK(pair.phi_at(16.0) == doctest::Approx(0.5 * pair.phi_at(8.0)));
  }
}

TEST_CASE("boundary constant against independent shooting") {
  const std::map<double, double> reference{{0.25, 0.5971749}, {0.5, 0.4706554}, {1.0, 0.3475823}, {2.0, 0.2489415}};
  double previous = INFINITY;
  for (const auto& [beta, expected] : reference) {
    const auto& sol = solution(beta);
    CHECK(sol.A == doctest::Approx(expected).epsilon(2e-7));
    CHECK(sol.A == doctest::Approx(shooting_A(beta)).epsilon(1e-8));
    CHECK(sol.A < previous);
    CHECK(sol.K <= 1.0);
    CHECK(sol.K > 0.5);
    previous = sol.A;
  }
}

TEST_CASE("small beta approaches the known-horizon constant") {
  CHECK(std::abs(solve_A(1e-3).A - classical::solve_B()) < 2e-2);
}

TEST_CASE("residuals") {
  for (double beta : {0.25, 0.5, 1.0, 2.0}) {
    const auto r = verify_residuals(solution(beta));
    CHECK(r.value_matching <= 1e-8);
    CHECK(r.smooth_pasting <= 1e-8);
    CHECK(r.kink <= 1e-6);
    CHECK(r.continuity <= 1e-8);
    CHECK(r.interior_ode <= 1e-6);
    CHECK(r.p_equation <= 1e-8);
  }
}

TEST_CASE("reflection identity on the negative half-line") {
  const auto& pair = *solution(0.5).pair;
  // Integrate the ODE itself on z < 0 from the data of phi(-z) at 0.
  const State left = odeint_solve(0.5, {1.0, -pair.phi_at(0.0, 1)}, 0.0, -2.0);
  CHECK(left[0] == doctest::Approx(pair.phi_at(2.0)).epsilon(1e-7));
  CHECK(left[1] == doctest::Approx(-pair.phi_at(2.0, 1)).epsilon(1e-6));
}

TEST_CASE("value function") {
  const auto& sol = solution(0.5);
  const double A = sol.A;
  CHECK(value_beta(sol, 0.0, A) == A);
  CHECK(value_beta(sol, 0.75, 1.0) == 1.0);
  CHECK(value_beta(sol, 1.0, 0.0) == 0.0);
  CHECK(boundary_beta(sol, 1.0) == 0.0);
  CHECK(boundary_beta(sol, 0.75) == doctest::Approx(0.5 * A));
  CHECK(std::abs(sol.u(0.0) - (sol.C + sol.D)) <= 1e-8);
  CHECK(std::abs(sol.u(-1e-12) - sol.u(1e-12)) <= 1e-8);
  // Algebraic decay towards -infinity: u(z) ~ c / |z|.
  CHECK(sol.u(-16.0) / sol.u(-8.0) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sol.u(-8.0) < 0.2 * sol.u(0.0));
  const classical::ClassicalSolution classic(1.0);
  for (double t : {0.0, 0.3, 0.8}) {
    for (double x = -2.0; x <= 1.5; x += 0.05) {
      const double v = value_beta(sol, t, x);
      CHECK(v >= std::max(x, 0.0) - 1e-14);
      CHECK(v <= classic.value(t, x) + 1e-12);
      CHECK(value_beta(solution(0.25), t, x) >= v - 1e-12);
      CHECK(v >= value_beta(solution(1.0), t, x) - 1e-12);
    }
  }
  CHECK_THROWS_AS(value_beta(sol, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(value_beta(sol, -0.1, 0.0), DomainError);
  CHECK_THROWS_AS(boundary_beta(sol, 1.5), DomainError);
}

TEST_CASE("convergence in epsilon and z_max") {
  const auto c = check_convergence(0.5);
  CHECK(c.passed);
  CHECK(c.delta <= 1e-6);
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_AS(solve_A(0.0), DomainError);
  BetaSolverOptions bad;
  bad.z_max = 0.5;
  CHECK_THROWS_AS(solve_A(0.5, bad), DomainError);
  bad = {};
  bad.nodes = 4;
  CHECK_THROWS_AS(solve_A(0.5, bad), DomainError);
}

TEST_CASE("finite-difference oracle agrees on A and the value at one half") {
  const auto pde = oracle::pde_free_boundary_half();
  const auto sol = beta_solver::solve_A(0.5);
  CHECK(std::abs(pde.A - sol.A) < 1e-3);
  CHECK(std::abs(pde.u0 - beta_solver::value_beta(sol, 0.0, 0.0)) < 1e-4);
}
