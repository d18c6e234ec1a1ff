#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bridgestop/beta_solver.hpp"
#include "bridgestop/classical.hpp"
#include "bridgestop/errors.hpp"
#include "bridgestop/gamma_solver.hpp"
#include "bridgestop/simulate.hpp"

using namespace bridgestop;
using namespace bridgestop::simulate;

namespace {

SimConfig gamma_config(std::int64_t paths, double dt = 1e-3) {
  SimConfig cfg;
  cfg.n_paths = paths;
  cfg.dt = dt;
  cfg.seed = 99;
  cfg.prior = Prior::gamma_half(1, 0.5);
  return cfg;
}

bool same(const McReport& a, const McReport& b) {
  return a.estimate == b.estimate && a.std_error == b.std_error && a.n_paths == b.n_paths;
}

}  // namespace

TEST_CASE("immediate stopping returns the start level") {
  auto cfg = gamma_config(1000);
  cfg.x0 = 0.37;
  const auto r = estimate_value(cfg, StoppingRule::immediate());
  CHECK(r.estimate == 0.37);
  CHECK(r.std_error == 0.0);
  CHECK(r.ci95_lo == r.ci95_hi);
  CHECK(estimate_value(gamma_config(200), StoppingRule::never()).estimate == 0.0);
}

TEST_CASE("paths pin at the first grid time after theta") {
  const auto cfg = gamma_config(1);
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = path_stream(cfg.seed, i);
    const auto path = simulate_path(cfg, rng);
    REQUIRE(path.times.size() >= 2);
    CHECK(path.values.back() == 0.0);
    CHECK(path.times.back() >= path.theta);
    CHECK(path.times[path.times.size() - 2] < path.theta);
    for (std::size_t k = 1; k + 1 < path.times.size(); ++k) {
      CHECK(path.times[k] == doctest::Approx(k * cfg.dt).epsilon(1e-12));
    }
  }
  auto rng = path_stream(cfg.seed, 0);
  const auto cut = simulate_path(cfg, rng, 0.0105);
  CHECK(cut.times.back() <= 0.0105);
}

TEST_CASE("Gaussian bridge moments for a known pinning time") {
  SimConfig cfg;
  cfg.n_paths = 1;
  cfg.dt = 1e-2;
  cfg.prior = Prior::point_mass(1.0);
  cfg.x0 = 1.0;
  const int n = 20000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto rng = path_stream(5, static_cast<std::uint64_t>(i));
    const auto path = simulate_path(cfg, rng);
    const double x = path.values[50];  // t = 0.5
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // Mean kappa (theta - t) / theta and variance t (theta - t) / theta.
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(0.25 / n));
  CHECK(std::abs(var - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / n));
}

TEST_CASE("determinism and thread independence") {
  auto cfg = gamma_config(3000);
  cfg.block_size = 256;
  const auto rule = StoppingRule::constant(0.5);
  cfg.threads = 1;
  const auto one = estimate_value(cfg, rule);
  cfg.threads = 3;
  const auto three = estimate_value(cfg, rule);
  CHECK(same(one, three));
  CHECK(same(estimate_value(cfg, rule), three));
  cfg.seed = 100;
  CHECK(estimate_value(cfg, rule).estimate != three.estimate);
}

TEST_CASE("parallel engine matches the serial reference") {
  auto cfg = gamma_config(2000);
  cfg.block_size = 128;
  const std::vector<StoppingRule> rules{StoppingRule::constant(0.5), StoppingRule::constant(0.3),
                                        StoppingRule::never()};
  const auto fast = estimate_values(cfg, rules);
  const auto slow = serial::estimate_values(cfg, rules);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    CHECK(fast[i].estimate == doctest::Approx(slow[i].estimate).epsilon(1e-13));
    CHECK(fast[i].std_error == doctest::Approx(slow[i].std_error).epsilon(1e-10));
  }
  cfg.prior = Prior::beta_half(0.5);
  const auto rule = StoppingRule::sqrt_horizon(0.47, 1.0);
  CHECK(estimate_value(cfg, rule).estimate ==
        doctest::Approx(serial::estimate_value(cfg, rule).estimate).epsilon(1e-13));
}

TEST_CASE("probe with factor one reproduces estimate_value") {
  const auto cfg = gamma_config(2000);
  const auto rule = StoppingRule::constant(0.5);
  const auto probe = optimality_probe(cfg, rule, {1.0, 0.8});
  CHECK(probe.rows[0].report.estimate == estimate_value(cfg, rule).estimate);
  CHECK(probe.rows[0].gap == 0.0);
  CHECK(probe.candidate.estimate == probe.rows[0].report.estimate);
}

TEST_CASE("known-horizon boundary beats its perturbations") {
  SimConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-3;
  cfg.seed = 3;
  cfg.prior = Prior::point_mass(1.0);
  const auto probe =
      optimality_probe(cfg, StoppingRule::sqrt_horizon(classical::solve_B(), 1.0), {0.8, 1.25});
  CHECK(probe.candidate_is_max);
  for (const auto& row : probe.rows) CHECK(row.gap > 3.0 * row.gap_se);
  CHECK(std::abs(probe.candidate.estimate - classical::value_classical(1.0, 0.0, 0.0)) <
        3.0 * probe.candidate.std_error + 0.01);
}

TEST_CASE("gamma value is time-homogeneous, so a posterior start gives the same value") {
  auto cfg = gamma_config(100000);
  cfg.t0 = 0.5;
  cfg.x0 = 0.3;
  const auto sol = gamma_solver::solve_gamma(0.5);
  const auto r = estimate_value(cfg, StoppingRule::constant(sol.b));
  CHECK(std::abs(r.estimate - gamma_solver::value_gamma(sol, 0.3)) < 3.0 * r.std_error + 2e-3);
}

TEST_CASE("dt refinement and dominance") {
  auto cfg = gamma_config(50000, 2e-4);
  const auto rule = StoppingRule::constant(0.5);
  const auto coarse = estimate_value(cfg, rule);
  cfg.dt = 1e-4;
  const auto fine = estimate_value(cfg, rule);
  CHECK(std::abs(coarse.estimate - fine.estimate) < 2.0 * std::hypot(coarse.std_error, fine.std_error));

  auto beta = gamma_config(20000);
  beta.prior = Prior::beta_half(0.5);
  const auto r = estimate_value(beta, StoppingRule::sqrt_horizon(beta_solver::solve_A(0.5).A, 1.0));
  CHECK(r.estimate <= classical::value_classical(1.0, 0.0, 0.0) + 3.0 * r.std_error);
}

TEST_CASE("compensator identity") {
  auto cfg = gamma_config(100000, 1e-4);
  const auto g = validate_compensator(cfg, 0.5, 0.1);
  CHECK(g.agree);
  CHECK(g.survivors > 0);
  cfg.prior = Prior::beta_half(0.5);
  const auto b = validate_compensator(cfg, 0.5, 0.1);
  CHECK(b.agree);
  cfg.n_paths = 20000;
  const auto tiny = validate_compensator(cfg, 0.5, 1e-3);
  CHECK(tiny.pin_frequency < 0.01);
  CHECK(tiny.compensator < 0.01);
  CHECK_THROWS_AS(validate_compensator(cfg, 0.95, 0.1), DomainError);
}

TEST_CASE("filter check against the closed-form drift factor") {
  auto cfg = gamma_config(400000);
  const auto right = validate_filter(cfg, 0.3, 0.9, 1.1);
  const auto left = validate_filter(cfg, 0.3, -1.1, -0.9);
  CHECK(right.agree);
  CHECK(left.agree);
  CHECK(right.f_center == doctest::Approx(1.0));
  CHECK(std::abs(right.sample_mean - left.sample_mean) < 3.0 * std::hypot(right.sample_se, left.sample_se));

  cfg.prior = Prior::beta_half(0.5);
  const auto beta = validate_filter(cfg, 0.1, 0.3, 0.35);
  CHECK(beta.agree);
  CHECK_THROWS_AS(validate_filter(gamma_config(10), 0.3, 5.0, 5.1), DomainError);
}

TEST_CASE("configuration checks") {
  auto cfg = gamma_config(0);
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = gamma_config(10, 0.5);
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = gamma_config(10);
  cfg.prior = Prior::beta_half(0.5);
  cfg.t0 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("rules and reports") {
  const auto rule = StoppingRule::sqrt_horizon(0.5, 1.0);
  CHECK(rule.boundary(0.75) == doctest::Approx(0.25));
  CHECK(rule.scaled(2.0).boundary(0.75) == doctest::Approx(0.5));
  CHECK(rule.boundary(2.0) == 0.0);
  const auto general = StoppingRule::general([](double t) { return 1.0 - t; }, "linear");
  CHECK(general.stops(0.5, 0.5));
  CHECK_FALSE(general.stops(0.5, 0.49));
  CHECK(general.describe() == "linear");
  std::ostringstream out;
  write_report(out, McReport{0.5, 0.01, 0.4804, 0.5196, 100, 7});
  CHECK(out.str() == "estimate: 0.5\nstd_error: 0.01\nci95_lo: 0.4804\nci95_hi: 0.5196\nn_paths: 100\nseed: 7\n");
}
