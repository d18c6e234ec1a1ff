#include "bridgestop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <omp.h>

#include "bridgestop/errors.hpp"
#include "bridgestop/filter.hpp"
#include "bridgestop/numerics.hpp"
#include "simulate_internal.hpp"

namespace bridgestop::simulate {

using detail::Moments;

void SimConfig::validate() const {
  if (n_paths < 1) throw DomainError("simulate: n_paths must be at least 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("simulate: dt must be positive");
  if (!(t0 >= 0.0) || !std::isfinite(x0) || !std::isfinite(kappa)) {
    throw DomainError("simulate: start point must be finite with t0 >= 0");
  }
  if (block_size < 1) throw DomainError("simulate: block_size must be at least 1");
  if (threads < 0) throw DomainError("simulate: threads must be non-negative");
  const double upper = prior.support_upper();
  if (!(t0 < upper)) throw DomainError("simulate: t0 must lie before the end of the prior support");
  const double horizon = std::isfinite(upper) ? upper - t0 : prior.mean();
  if (dt > horizon / 100.0) throw DomainError("simulate: dt exceeds 1/100 of the expected horizon");
}

// ---------------------------------------------------------------------------

StoppingRule StoppingRule::constant(double level) {
  StoppingRule r;
  r.kind_ = Kind::constant;
  r.level_ = level;
  return r;
}

StoppingRule StoppingRule::sqrt_horizon(double level, double horizon) {
  if (!(horizon > 0.0)) throw DomainError("sqrt_horizon rule: horizon must be positive");
  StoppingRule r;
  r.kind_ = Kind::sqrt_horizon;
  r.level_ = level;
  r.horizon_ = horizon;
  return r;
}

StoppingRule StoppingRule::immediate() {
  StoppingRule r;
  r.kind_ = Kind::immediate;
  return r;
}

StoppingRule StoppingRule::never() {
  StoppingRule r;
  r.kind_ = Kind::never;
  return r;
}

StoppingRule StoppingRule::general(std::function<double(double)> boundary, std::string name) {
  if (!boundary) throw DomainError("general rule: empty boundary function");
  StoppingRule r;
  r.kind_ = Kind::general;
  r.fn_ = std::move(boundary);
  r.name_ = std::move(name);
  return r;
}

double StoppingRule::boundary(double t) const {
  switch (kind_) {
    case Kind::constant:
      return scale_ * level_;
    case Kind::sqrt_horizon:
      return scale_ * level_ * std::sqrt(std::max(0.0, horizon_ - t));
    case Kind::immediate:
      return -std::numeric_limits<double>::infinity();
    case Kind::never:
      return std::numeric_limits<double>::infinity();
    case Kind::general:
      return scale_ * fn_(t);
  }
  return std::numeric_limits<double>::infinity();
}

StoppingRule StoppingRule::scaled(double factor) const {
  StoppingRule r = *this;
  r.scale_ *= factor;
  return r;
}

std::string StoppingRule::describe() const {
  std::string s;
  switch (kind_) {
    case Kind::constant:
      s = "constant(" + std::to_string(level_) + ")";
      break;
    case Kind::sqrt_horizon:
      s = "sqrt(" + std::to_string(level_) + ", T=" + std::to_string(horizon_) + ")";
      break;
    case Kind::immediate:
      return "immediate";
    case Kind::never:
      return "never";
    case Kind::general:
      s = name_;
      break;
  }
  if (scale_ != 1.0) s += " x " + std::to_string(scale_);
  return s;
}

// ---------------------------------------------------------------------------

ThetaSampler::ThetaSampler(const SimConfig& cfg) : prior_(cfg.prior), t0_(cfg.t0) {
  if (cfg.t0 == 0.0) return;
  if (!prior_.has_density()) {
    if (!(prior_.support_upper() > cfg.t0)) {
      throw DomainError("simulate: known pinning time precedes t0");
    }
    return;  // point mass: theta is known
  }
  from_prior_ = false;
  const filter::Posterior post(filter::PosteriorState{cfg.t0, cfg.x0, cfg.prior, cfg.kappa});
  double upper = prior_.support_upper();
  if (!std::isfinite(upper)) {
    const auto* g = std::get_if<GammaHalf>(&prior_.kind());
    const double rate = g ? g->beta : 1.0 / prior_.mean();
    const double shape = g ? g->shape() : 1.0;
    upper = cfg.t0 + (shape + 60.0) / rate;
  }
  // Midpoint masses in s = sqrt(r - t0); the density in s stays bounded at s = 0.
  constexpr int kCells = 20000;
  const double s_max = std::sqrt(upper - cfg.t0);
  s_.resize(kCells + 1);
  cdf_.assign(kCells + 1, 0.0);
  for (int i = 0; i <= kCells; ++i) s_[i] = s_max * i / kCells;
  for (int i = 0; i < kCells; ++i) {
    const double s = 0.5 * (s_[i] + s_[i + 1]);
    const double mass = 2.0 * s * post.density(cfg.t0 + s * s) * (s_[i + 1] - s_[i]);
    cdf_[i + 1] = cdf_[i] + mass;
  }
  if (!(cdf_.back() > 0.0)) throw DomainError("simulate: posterior table has zero mass");
}

double ThetaSampler::operator()(Rng& rng) const {
  if (from_prior_) return prior_.sample(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
  i = std::min(i, s_.size() - 2);
  const double width = cdf_[i + 1] - cdf_[i];
  const double w = width > 0.0 ? (u - cdf_[i]) / width : 0.5;
  const double s = s_[i] + std::clamp(w, 0.0, 1.0) * (s_[i + 1] - s_[i]);
  // Keep theta strictly after t0.
  return std::max(t0_ + s * s, std::nextafter(t0_, std::numeric_limits<double>::infinity()));
}

Rng path_stream(std::uint64_t seed, std::uint64_t path_index) {
  return Rng(numerics::derive_seed(seed, path_index));
}

// ---------------------------------------------------------------------------

namespace {

double draw_theta(const SimConfig& cfg, const ThetaSampler& sampler, Rng& rng) {
  if (cfg.t0 == 0.0) return cfg.prior.sample(rng);
  return sampler(rng);
}

/**
 * Runs one path until every rule has stopped or the bridge pins. payoff[i]
 * receives X at the stopping time of rule i, or 0 if it pinned first.
 */
void run_path(const SimConfig& cfg, const ThetaSampler& sampler,
              const std::vector<StoppingRule>& rules, Rng& rng,
              std::vector<double>& payoff, std::vector<char>& done) {
  const double theta = draw_theta(cfg, sampler, rng);
  detail::Normal normal(0.0, 1.0);
  std::fill(payoff.begin(), payoff.end(), 0.0);
  std::fill(done.begin(), done.end(), 0);
  std::size_t remaining = rules.size();
  double x = cfg.x0;
  for (std::int64_t k = 0;; ++k) {
    const double t = cfg.t0 + static_cast<double>(k) * cfg.dt;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (!done[i] && rules[i].stops(t, x)) {
        done[i] = 1;
        payoff[i] = x;
        --remaining;
      }
    }
    if (remaining == 0) return;
    const double t_next = cfg.t0 + static_cast<double>(k + 1) * cfg.dt;
    if (t_next >= theta) return;
    x = detail::bridge_step(x, t, t_next, theta, normal(rng));
  }
}

int thread_count(const SimConfig& cfg) { return cfg.threads > 0 ? cfg.threads : omp_get_max_threads(); }

struct RuleMoments {
  std::vector<Moments> value;  ///< per rule
  std::vector<Moments> gap;    ///< rule 0 minus rule i
};

RuleMoments run_blocks(const SimConfig& cfg, const std::vector<StoppingRule>& rules) {
  cfg.validate();
  if (rules.empty()) throw DomainError("simulate: no stopping rules given");
  const ThetaSampler sampler(cfg);
  const std::int64_t blocks = (cfg.n_paths + cfg.block_size - 1) / cfg.block_size;
  const std::size_t m = rules.size();
  std::vector<RuleMoments> partial(static_cast<std::size_t>(blocks),
                                   RuleMoments{std::vector<Moments>(m), std::vector<Moments>(m)});

#pragma omp parallel num_threads(thread_count(cfg))
  {
    std::vector<double> payoff(m);
    std::vector<char> done(m);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < blocks; ++b) {
      auto& acc = partial[static_cast<std::size_t>(b)];
      const std::int64_t first = b * cfg.block_size;
      const std::int64_t last = std::min(cfg.n_paths, first + cfg.block_size);
      for (std::int64_t p = first; p < last; ++p) {
        auto rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p));
        run_path(cfg, sampler, rules, rng, payoff, done);
        for (std::size_t i = 0; i < m; ++i) {
          acc.value[i].add(payoff[i]);
          acc.gap[i].add(payoff[0] - payoff[i]);
        }
      }
    }
  }

  RuleMoments total{std::vector<Moments>(m), std::vector<Moments>(m)};
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < m; ++i) {
      total.value[i].merge(acc.value[i]);
      total.gap[i].merge(acc.gap[i]);
    }
  }
  return total;
}

}  // namespace

BridgePath simulate_path(const SimConfig& cfg, Rng& rng, double t_end) {
  cfg.validate();
  return simulate_path(cfg, ThetaSampler(cfg), rng, t_end);
}

BridgePath simulate_path(const SimConfig& cfg, const ThetaSampler& sampler, Rng& rng,
                         double t_end) {
  BridgePath path;
  path.theta = draw_theta(cfg, sampler, rng);
  detail::Normal normal(0.0, 1.0);
  double x = cfg.x0;
  for (std::int64_t k = 0;; ++k) {
    const double t = cfg.t0 + static_cast<double>(k) * cfg.dt;
    path.times.push_back(t);
    path.values.push_back(x);
    const double t_next = cfg.t0 + static_cast<double>(k + 1) * cfg.dt;
    if (t_next > t_end) break;
    if (t_next >= path.theta) {
      path.times.push_back(t_next);
      path.values.push_back(0.0);
      break;
    }
    x = detail::bridge_step(x, t, t_next, path.theta, normal(rng));
  }
  return path;
}

std::vector<McReport> estimate_values(const SimConfig& cfg, const std::vector<StoppingRule>& rules) {
  const auto moments = run_blocks(cfg, rules);
  std::vector<McReport> out;
  for (const auto& m : moments.value) out.push_back(detail::make_report(m, cfg.seed));
  return out;
}

McReport estimate_value(const SimConfig& cfg, const StoppingRule& rule) {
  return estimate_values(cfg, std::vector<StoppingRule>{rule}).front();
}

ProbeReport optimality_probe(const SimConfig& cfg, const StoppingRule& rule,
                             const std::vector<double>& factors) {
  std::vector<StoppingRule> rules{rule};
  for (double f : factors) rules.push_back(rule.scaled(f));
  const auto moments = run_blocks(cfg, rules);

  ProbeReport out;
  out.candidate = detail::make_report(moments.value[0], cfg.seed);
  out.candidate_is_max = true;
  out.separated = true;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    ProbeRow row;
    row.factor = factors[i];
    row.report = detail::make_report(moments.value[i + 1], cfg.seed);
    row.gap = moments.gap[i + 1].mean;
    row.gap_se = moments.gap[i + 1].std_error();
    if (row.report.estimate > out.candidate.estimate) out.candidate_is_max = false;
    if (!(out.candidate.ci95_lo > row.report.ci95_hi)) out.separated = false;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------

CompensatorReport validate_compensator(const SimConfig& cfg, double t, double window) {
  cfg.validate();
  if (cfg.t0 != 0.0) throw DomainError("validate_compensator: requires t0 == 0");
  if (!cfg.prior.has_density()) throw DomainError("validate_compensator: prior needs a density");
  if (!(t > 0.0) || !(window > 0.0) || !(t + window < cfg.prior.support_upper())) {
    throw DomainError("validate_compensator: need 0 < t < t + window < end of support");
  }
  const double h = std::sqrt(cfg.dt);
  const auto steps = static_cast<std::int64_t>(std::ceil(window / cfg.dt - 1e-9));
  std::vector<double> q(static_cast<std::size_t>(steps));
  for (std::int64_t k = 0; k < steps; ++k) {
    q[static_cast<std::size_t>(k)] =
        filter::killing_rate(cfg.prior, t + static_cast<double>(k) * cfg.dt);
  }
  const double t_end = t + window;
  const std::int64_t blocks = (cfg.n_paths + cfg.block_size - 1) / cfg.block_size;
  std::vector<Moments> pin(static_cast<std::size_t>(blocks));
  std::vector<Moments> comp(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(cfg))
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::int64_t first = b * cfg.block_size;
    const std::int64_t last = std::min(cfg.n_paths, first + cfg.block_size);
    for (std::int64_t p = first; p < last; ++p) {
      auto rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p));
      const double theta = cfg.prior.sample(rng);
      if (theta <= t) continue;
      detail::Normal normal(0.0, 1.0);
      const double gap = theta - t;
      double x = cfg.x0 * gap / theta + std::sqrt(t * gap / theta) * normal(rng);
      double sum = 0.0;
      for (std::int64_t k = 0; k < steps; ++k) {
        const double tk = t + static_cast<double>(k) * cfg.dt;
        if (tk >= theta) break;
        const double t_next = std::min(tk + cfg.dt, t_end);
        const double span = std::min(t_next, theta) - tk;
        if (std::abs(x) <= h) sum += q[static_cast<std::size_t>(k)] * span / (2.0 * h);
        if (t_next >= theta) break;
        x = detail::bridge_step(x, tk, t_next, theta, normal(rng));
      }
      pin[static_cast<std::size_t>(b)].add(theta <= t_end ? 1.0 : 0.0);
      comp[static_cast<std::size_t>(b)].add(sum);
    }
  }

  Moments pin_total;
  Moments comp_total;
  for (std::int64_t b = 0; b < blocks; ++b) {
    pin_total.merge(pin[static_cast<std::size_t>(b)]);
    comp_total.merge(comp[static_cast<std::size_t>(b)]);
  }
  CompensatorReport r;
  r.survivors = pin_total.n;
  if (r.survivors == 0) throw DomainError("validate_compensator: no path survives to t");
  r.pin_frequency = pin_total.mean;
  r.pin_se = pin_total.std_error();
  r.compensator = comp_total.mean;
  r.compensator_se = comp_total.std_error();
  const double se = std::hypot(r.pin_se, r.compensator_se);
  r.z_score = se > 0.0 ? (r.pin_frequency - r.compensator) / se : 0.0;
  r.agree = std::abs(r.z_score) <= 3.0;
  return r;
}

FilterReport validate_filter(const SimConfig& cfg, double t, double bin_lo, double bin_hi) {
  cfg.validate();
  if (cfg.t0 != 0.0) throw DomainError("validate_filter: requires t0 == 0");
  if (!cfg.prior.has_density()) throw DomainError("validate_filter: prior needs a density");
  if (!(t > 0.0) || !(t < cfg.prior.support_upper())) {
    throw DomainError("validate_filter: t must lie inside the prior support");
  }
  if (!(bin_hi > bin_lo)) throw DomainError("validate_filter: empty bin interval");
  const std::int64_t blocks = (cfg.n_paths + cfg.block_size - 1) / cfg.block_size;
  std::vector<Moments> inv_gap(static_cast<std::size_t>(blocks));
  std::vector<Moments> fval(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(cfg))
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::int64_t first = b * cfg.block_size;
    const std::int64_t last = std::min(cfg.n_paths, first + cfg.block_size);
    for (std::int64_t p = first; p < last; ++p) {
      auto rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p));
      const double theta = cfg.prior.sample(rng);
      if (theta <= t) continue;
      detail::Normal normal(0.0, 1.0);
      const double gap = theta - t;
      const double x = cfg.x0 * gap / theta + std::sqrt(t * gap / theta) * normal(rng);
      if (x < bin_lo || x > bin_hi) continue;
      inv_gap[static_cast<std::size_t>(b)].add(1.0 / gap);
      fval[static_cast<std::size_t>(b)].add(filter::drift(cfg.prior, t, x, cfg.x0).f_value);
    }
  }

  Moments a;
  Moments f;
  for (std::int64_t b = 0; b < blocks; ++b) {
    a.merge(inv_gap[static_cast<std::size_t>(b)]);
    f.merge(fval[static_cast<std::size_t>(b)]);
  }
  if (a.n == 0) throw DomainError("validate_filter: no surviving path landed in the bin");
  FilterReport r;
  r.in_bin = a.n;
  r.sample_mean = a.mean;
  r.sample_se = a.std_error();
  r.f_bin_average = f.mean;
  r.f_bin_average_se = f.std_error();
  r.f_center = filter::drift(cfg.prior, t, 0.5 * (bin_lo + bin_hi), cfg.x0).f_value;
  const double se = std::hypot(r.sample_se, r.f_bin_average_se);
  r.z_score = se > 0.0 ? (r.sample_mean - r.f_bin_average) / se : 0.0;
  r.agree = std::abs(r.z_score) <= 3.0;
  return r;
}

// ---------------------------------------------------------------------------

void write_report(std::ostream& out, const McReport& report) {
  const auto precision = out.precision(12);
  out << "estimate: " << report.estimate << '\n'
      << "std_error: " << report.std_error << '\n'
      << "ci95_lo: " << report.ci95_lo << '\n'
      << "ci95_hi: " << report.ci95_hi << '\n'
      << "n_paths: " << report.n_paths << '\n'
      << "seed: " << report.seed << '\n';
  out.precision(precision);
}

void write_path_csv(std::ostream& out, const BridgePath& path) {
  const auto precision = out.precision(12);
  out << "t,X\n";
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    out << path.times[i] << ',' << path.values[i] << '\n';
  }
  out.precision(precision);
}

}  // namespace bridgestop::simulate
