#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "bridgestop/simulate.hpp"

namespace bridgestop::simulate::detail {

/// Ziggurat normal sampler; several times faster than the polar method of
/// std::normal_distribution, which dominates the cost of a path step.
using Normal = boost::random::normal_distribution<double>;

/// Running mean and sum of squared deviations (Welford), mergeable (Chan et al.).
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const auto total = n + o.n;
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(total);
    n = total;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

inline McReport make_report(const Moments& m, std::uint64_t seed) {
  McReport r;
  r.estimate = m.mean;
  r.std_error = m.std_error();
  r.ci95_lo = r.estimate - 1.96 * r.std_error;
  r.ci95_hi = r.estimate + 1.96 * r.std_error;
  r.n_paths = m.n;
  r.seed = seed;
  return r;
}

/// Exact Gaussian bridge transition from (t, x) to t_next < theta.
inline double bridge_step(double x, double t, double t_next, double theta, double normal) {
  const double rho = (theta - t_next) / (theta - t);
  return x * rho + std::sqrt((t_next - t) * rho) * normal;
}

}  // namespace bridgestop::simulate::detail
