#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "bridgestop/priors.hpp"

namespace bridgestop::simulate {

/**
 * Monte Carlo configuration. Paths start at (t0, x0). With t0 == 0 the
 * pinning time is drawn from the prior and x0 is the bridge's starting point;
 * with t0 > 0 it is drawn from the posterior given survival to t0 and
 * X_{t0} = x0 for a bridge started at kappa.
 */
struct SimConfig {
  std::int64_t n_paths = 100000;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  double t0 = 0.0;
  double x0 = 0.0;
  double kappa = 0.0;
  Prior prior = Prior::gamma_half(1, 0.5);
  int threads = 0;              ///< 0: OpenMP default
  std::int64_t block_size = 4096;  ///< paths per work unit; fixes the reduction order

  /// Throws DomainError: n_paths >= 1, dt > 0, dt <= expected horizon / 100.
  void validate() const;
};

/// Grid path of the primal model; X is 0 at the first grid time >= theta.
struct BridgePath {
  double theta = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};

struct McReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
};

/// First-crossing rule: stop at the first grid time with X >= boundary(t).
class StoppingRule {
public:
  enum class Kind { constant, sqrt_horizon, immediate, never, general };

  static StoppingRule constant(double level);
  /// level * sqrt(horizon - t), and level * 0 beyond the horizon.
  static StoppingRule sqrt_horizon(double level, double horizon);
  static StoppingRule immediate();
  static StoppingRule never();
  static StoppingRule general(std::function<double(double)> boundary, std::string name);

  double boundary(double t) const;
  bool stops(double t, double x) const { return x >= boundary(t); }
  /// Boundary multiplied by factor (immediate and never are unchanged).
  StoppingRule scaled(double factor) const;
  std::string describe() const;
  Kind kind() const { return kind_; }

private:
  StoppingRule() = default;
  Kind kind_ = Kind::never;
  double level_ = 0.0;
  double horizon_ = 0.0;
  double scale_ = 1.0;
  std::function<double(double)> fn_;
  std::string name_;
};

/// Posterior sampler for theta given (t0, x0, kappa); prior draws when t0 == 0.
class ThetaSampler {
public:
  explicit ThetaSampler(const SimConfig& cfg);
  double operator()(Rng& rng) const;

private:
  Prior prior_;
  bool from_prior_ = true;
  double t0_ = 0.0;
  std::vector<double> s_;    ///< cell edges in s = sqrt(r - t0)
  std::vector<double> cdf_;  ///< cumulative cell masses
};

/// Random stream of path i: Rng seeded with derive_seed(seed, i).
Rng path_stream(std::uint64_t seed, std::uint64_t path_index);

/**
 * One full path from (t0, x0) up to pinning, or until t_end if that comes
 * first. Consumes the stream exactly like the estimators do.
 */
BridgePath simulate_path(const SimConfig& cfg, Rng& rng,
                         double t_end = std::numeric_limits<double>::infinity());

/// Same, reusing a sampler built once for cfg.
BridgePath simulate_path(const SimConfig& cfg, const ThetaSampler& sampler, Rng& rng,
                         double t_end = std::numeric_limits<double>::infinity());

/// Mean payoff X_tau 1{tau < theta}; parallel over blocks of paths.
McReport estimate_value(const SimConfig& cfg, const StoppingRule& rule);

/// Several rules evaluated on the same paths (common random numbers).
std::vector<McReport> estimate_values(const SimConfig& cfg, const std::vector<StoppingRule>& rules);

struct ProbeRow {
  double factor = 1.0;
  McReport report;
  double gap = 0.0;     ///< candidate minus this row, paired over paths
  double gap_se = 0.0;  ///< standard error of the paired gap
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  McReport candidate;
  /// Candidate estimate >= every perturbed estimate.
  bool candidate_is_max = false;
  /// Candidate CI lies strictly above every perturbed CI.
  bool separated = false;
};

/// Candidate rule against rule.scaled(f) for each factor, on common random numbers.
ProbeReport optimality_probe(const SimConfig& cfg, const StoppingRule& rule,
                             const std::vector<double>& factors);

struct CompensatorReport {
  std::int64_t survivors = 0;
  double pin_frequency = 0.0;  ///< P(theta <= t + window | theta > t)
  double pin_se = 0.0;
  double compensator = 0.0;    ///< E[sum q 1{|X| <= h} dt / (2h)], h = sqrt(dt)
  double compensator_se = 0.0;
  double z_score = 0.0;        ///< difference over the combined SE
  bool agree = false;          ///< |z| <= 3
};

/**
 * Pinning frequency in (t, t + window] among paths alive at t against the
 * killing-rate compensator built from a discretized local time at zero.
 * Requires t0 == 0 in the config.
 */
CompensatorReport validate_compensator(const SimConfig& cfg, double t, double window);

struct FilterReport {
  std::int64_t in_bin = 0;
  double sample_mean = 0.0;  ///< mean of 1/(theta - t) over paths with X_t in the bin
  double sample_se = 0.0;
  double f_center = 0.0;     ///< f(t, bin centre)
  double f_bin_average = 0.0;  ///< mean of f(t, X_t) over the same paths
  double f_bin_average_se = 0.0;
  double z_score = 0.0;      ///< (sample_mean - f_bin_average) / combined SE
  bool agree = false;        ///< |z| <= 3
};

/**
 * Among paths alive at t with X_t in [bin_lo, bin_hi], compares the mean of
 * 1/(theta - t) with the drift factor f. X_t is drawn from its exact
 * Gaussian marginal given theta. Requires t0 == 0 and 0 < t. Throws
 * DomainError when the bin is empty.
 */
FilterReport validate_filter(const SimConfig& cfg, double t, double bin_lo, double bin_hi);

/// "key: value" lines.
void write_report(std::ostream& out, const McReport& report);

/// CSV rows (t, X) of one path.
void write_path_csv(std::ostream& out, const BridgePath& path);

namespace serial {

/**
 * Reference implementation: each path is generated in full by simulate_path
 * and the rules are applied to the stored path afterwards; the running sums
 * are accumulated in path order on a single thread.
 */
std::vector<McReport> estimate_values(const SimConfig& cfg, const std::vector<StoppingRule>& rules);

McReport estimate_value(const SimConfig& cfg, const StoppingRule& rule);

}  // namespace serial

}  // namespace bridgestop::simulate
