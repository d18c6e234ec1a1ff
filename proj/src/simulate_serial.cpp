#include <cstdint>
#include <vector>

#include "bridgestop/errors.hpp"
#include "bridgestop/simulate.hpp"
#include "simulate_internal.hpp"

namespace bridgestop::simulate::serial {

std::vector<McReport> estimate_values(const SimConfig& cfg, const std::vector<StoppingRule>& rules) {
  cfg.validate();
  if (rules.empty()) throw DomainError("simulate: no stopping rules given");
  const ThetaSampler sampler(cfg);
  std::vector<detail::Moments> moments(rules.size());
  for (std::int64_t p = 0; p < cfg.n_paths; ++p) {
    auto rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p));
    const BridgePath path = simulate_path(cfg, sampler, rng);
    for (std::size_t i = 0; i < rules.size(); ++i) {
      double payoff = 0.0;
      for (std::size_t k = 0; k < path.times.size(); ++k) {
        const double t = path.times[k];
        if (t >= path.theta) break;
        if (rules[i].stops(t, path.values[k])) {
          payoff = path.values[k];
          break;
        }
      }
      moments[i].add(payoff);
    }
  }
  std::vector<McReport> out;
  for (const auto& m : moments) out.push_back(detail::make_report(m, cfg.seed));
  return out;
}

McReport estimate_value(const SimConfig& cfg, const StoppingRule& rule) {
  return serial::estimate_values(cfg, std::vector<StoppingRule>{rule}).front();
}

}  // namespace bridgestop::simulate::serial
