#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "bridgestop/errors.hpp"
#include "bridgestop/numerics.hpp"
#include "bridgestop/priors.hpp"

using namespace bridgestop;

namespace {

double sample_mean(const Prior& p, int n, double& se) {
  Rng rng(12345);
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = p.sample(rng);
    sum += x;
    sq += x * x;
  }
  const double m = sum / n;
  se = std::sqrt((sq / n - m * m) / n);
  return m;
}

const numerics::QuadratureSpec kTight{1e-13, 1e-11, 4000};

}  // namespace

TEST_CASE("gamma prior") {
  for (int n : {1, 2, 3}) {
    const auto p = Prior::gamma_half(n, 0.7);
    const double mass = numerics::integrate([&](double r) { return p.density(r); }, 0.0, INFINITY, kTight);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.mean() == doctest::Approx((n - 0.5) / 0.7));
    double se = 0.0;
    const double m = sample_mean(p, 200000, se);
    CHECK(std::abs(m - p.mean()) < 4.0 * se);
    CHECK(std::isinf(p.support_upper()));
  }
  CHECK_THROWS_AS(Prior::gamma_half(0, 1.0), DomainError);
  CHECK_THROWS_AS(Prior::gamma_half(1, 0.0), DomainError);
}

TEST_CASE("beta prior") {
  for (double beta : {0.25, 0.5, 1.0, 2.0}) {
    const auto p = Prior::beta_half(beta);
    // Mass through the endpoint-regularized pieces.
    const double lower = numerics::integrate([&](double s) { return 2.0 * s * p.density(s * s); }, 0.0,
                                             std::sqrt(0.5), kTight);
    const double upper = numerics::integrate([&](double w) { return p.density_upper_substituted(w); },
                                             0.0, std::pow(0.5, beta), kTight);
    CHECK(lower + upper == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.mean() == doctest::Approx(1.0 / (1.0 + 2.0 * beta)));
    double se = 0.0;
    const double m = sample_mean(p, 200000, se);
    CHECK(std::abs(m - p.mean()) < 4.0 * se);
    CHECK(p.upper_endpoint_exponent() == beta);
  }
  CHECK(Prior::beta_half(0.5).density(1.0) == 0.0);
  CHECK_THROWS_AS(Prior::beta_half(-1.0), DomainError);
}

TEST_CASE("tabulated prior") {
  // Triangle on [1, 3], supplied with mass 2 so it gets renormalized.
  const auto p = Prior::tabulated({1.0, 2.0, 3.0}, {0.0, 2.0, 0.0});
  CHECK(p.density(2.0) == doctest::Approx(1.0));
  CHECK(p.density(1.5) == doctest::Approx(0.5));
  CHECK(p.density(0.5) == 0.0);
  CHECK(p.mean() == doctest::Approx(2.0));
  CHECK(p.support_lower() == 1.0);
  CHECK(p.support_upper() == 3.0);
  double se = 0.0;
  const double m = sample_mean(p, 100000, se);
  CHECK(std::abs(m - 2.0) < 4.0 * se);

  CHECK_THROWS_AS(Prior::tabulated({1.0}, {1.0}), DomainError);
  CHECK_THROWS_AS(Prior::tabulated({1.0, 1.0}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(Prior::tabulated({1.0, 2.0}, {1.0, -1.0}), DomainError);
  CHECK_THROWS_AS(Prior::tabulated({1.0, 2.0}, {0.0, 0.0}), DomainError);
}

TEST_CASE("tabulated prior from csv") {
  const auto path = std::filesystem::temp_directory_path() / "bridgestop_prior_test.csv";
  {
    std::ofstream f(path);
    f << "r,density\n# comment\n0.0,1.0\n0.5,1.0\n1.0,1.0\n";
  }
  const auto p = Prior::from_csv(path);
  CHECK(p.density(0.25) == doctest::Approx(1.0));
  CHECK(p.mean() == doctest::Approx(0.5));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(Prior::from_csv("/nonexistent/prior.csv"), DomainError);
}

TEST_CASE("point mass prior") {
  const auto p = Prior::point_mass(1.5);
  Rng rng(1);
  CHECK(p.sample(rng) == 1.5);
  CHECK(p.mean() == 1.5);
  CHECK_FALSE(p.has_density());
  CHECK_THROWS_AS(Prior::point_mass(0.0), DomainError);
}
