#include "bridgestop/urn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "bridgestop/errors.hpp"

namespace bridgestop::urn {

NPrior NPrior::degenerate(int n) { return NPrior{{n}, {1.0}}; }

void NPrior::validate() const {
  if (n.empty() || n.size() != weight.size()) {
    throw DomainError("urn prior: support and weights must be non-empty and of equal length");
  }
  std::set<int> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 1) throw DomainError("urn prior: n must be at least 1");
    if (!seen.insert(n[i]).second) throw DomainError("urn prior: repeated support point");
    if (!(weight[i] >= 0.0) || !std::isfinite(weight[i])) {
      throw DomainError("urn prior: weights must be finite and non-negative");
    }
    total += weight[i];
  }
  if (!(total > 0.0)) throw DomainError("urn prior: total weight is zero");
}

int NPrior::n_max() const { return *std::max_element(n.begin(), n.end()); }

double NPrior::mean() const {
  double m = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    m += weight[i] * n[i];
    total += weight[i];
  }
  return m / total;
}

// ---------------------------------------------------------------------------

UrnPolicy::UrnPolicy(int n_max, std::vector<std::vector<double>> value,
                     std::vector<std::vector<char>> stop)
    : n_max_(n_max), value_(std::move(value)), stop_(std::move(stop)) {}

int UrnPolicy::s_bound(int k) const { return std::min(k, 2 * n_max_ - k); }

bool UrnPolicy::feasible(int k, int s) const {
  if (k < 0 || k > k_max()) return false;
  if (((k + s) % 2 + 2) % 2 != 0) return false;
  return std::abs(s) <= s_bound(k);
}

std::size_t UrnPolicy::index(int k, int s) const {
  if (!feasible(k, s)) throw InternalError("urn: infeasible state access");
  return static_cast<std::size_t>((s + s_bound(k)) / 2);
}

double UrnPolicy::value(int k, int s) const {
  return value_[static_cast<std::size_t>(k)][index(k, s)];
}

Action UrnPolicy::action(int k, int s) const {
  return stop_[static_cast<std::size_t>(k)][index(k, s)] ? Action::stop : Action::go_on;
}

int UrnPolicy::min_stop_level(int k) const {
  const int bound = s_bound(k);
  for (int s = -bound; s <= bound; s += 2) {
    if (action(k, s) == Action::stop) return s;
  }
  return bound + 2;
}

void UrnPolicy::write_csv(std::ostream& out) const {
  const auto precision = out.precision(12);
  out << "k,s,action,value\n";
  for (int k = 0; k <= k_max(); ++k) {
    const int bound = s_bound(k);
    for (int s = -bound; s <= bound; s += 2) {
      out << k << ',' << s << ',' << (action(k, s) == Action::stop ? "stop" : "continue") << ','
          << value(k, s) << '\n';
    }
  }
  out.precision(precision);
}

// ---------------------------------------------------------------------------

namespace {

struct Table {
  std::vector<std::vector<double>> value;
  std::vector<std::vector<char>> stop;
};

Table allocate(int n_max) {
  Table t;
  const int k_max = 2 * n_max;
  t.value.resize(static_cast<std::size_t>(k_max + 1));
  t.stop.resize(static_cast<std::size_t>(k_max + 1));
  for (int k = 0; k <= k_max; ++k) {
    const int bound = std::min(k, k_max - k);
    t.value[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(bound + 1), 0.0);
    t.stop[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(bound + 1), 1);
  }
  return t;
}

/// Value of (k + 1, s') given the next-level row; s' must be feasible there.
double next_value(const std::vector<double>& row, int bound_next, int s_next) {
  return row[static_cast<std::size_t>((s_next + bound_next) / 2)];
}

double log_likelihood(int n, int reds, int blacks) {
  const int k = reds + blacks;
  return 2.0 * std::lgamma(n + 1.0) - std::lgamma(n - reds + 1.0) - std::lgamma(n - blacks + 1.0) -
         std::lgamma(2.0 * n + 1.0) + std::lgamma(2.0 * n - k + 1.0);
}

}  // namespace

UrnPolicy solve_known_n(int n) {
  if (n < 1 || n > 5000) throw DomainError("solve_known_n: n must lie in [1, 5000]");
  const int k_max = 2 * n;
  Table t = allocate(n);
  for (int k = k_max - 1; k >= 0; --k) {
    const int bound = std::min(k, k_max - k);
    const int bound_next = std::min(k + 1, k_max - k - 1);
    const auto& next = t.value[static_cast<std::size_t>(k + 1)];
    for (int s = -bound; s <= bound; s += 2) {
      const int reds = (k + s) / 2;
      const double p_red = static_cast<double>(n - reds) / (2 * n - k);
      double cont = 0.0;
      if (p_red > 0.0) cont += p_red * next_value(next, bound_next, s + 1);
      if (p_red < 1.0) cont += (1.0 - p_red) * next_value(next, bound_next, s - 1);
      const auto i = static_cast<std::size_t>((s + bound) / 2);
      const bool stop = s >= cont;
      t.stop[static_cast<std::size_t>(k)][i] = stop;
      t.value[static_cast<std::size_t>(k)][i] = stop ? s : cont;
    }
  }
  return UrnPolicy(n, std::move(t.value), std::move(t.stop));
}

std::vector<double> posterior_over_n(const NPrior& prior, int k, int s) {
  prior.validate();
  if (k < 0 || std::abs(s) > k || (k + s) % 2 != 0) throw DomainError("urn: malformed state");
  const int reds = (k + s) / 2;
  const int blacks = k - reds;
  std::vector<double> logw(prior.n.size(), -INFINITY);
  double top = -INFINITY;
  for (std::size_t i = 0; i < prior.n.size(); ++i) {
    const int n = prior.n[i];
    if (reds > n || blacks > n || prior.weight[i] == 0.0) continue;
    logw[i] = std::log(prior.weight[i]) + log_likelihood(n, reds, blacks);
    top = std::max(top, logw[i]);
  }
  if (top == -INFINITY) throw DomainError("urn: no n in the support is consistent with the draws");
  std::vector<double> post(prior.n.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    if (logw[i] == -INFINITY) continue;
    post[i] = std::exp(logw[i] - top);
    total += post[i];
  }
  for (double& p : post) p /= total;
  return post;
}

UrnPolicy solve_unknown_n(const NPrior& prior) {
  prior.validate();
  const int n_max = prior.n_max();
  if (n_max > 2000) throw DomainError("solve_unknown_n: n_max must not exceed 2000");
  const int k_max = 2 * n_max;
  Table t = allocate(n_max);
  for (int k = k_max - 1; k >= 0; --k) {
    const int bound = std::min(k, k_max - k);
    const int bound_next = std::min(k + 1, k_max - k - 1);
    const auto& next = t.value[static_cast<std::size_t>(k + 1)];
    for (int s = -bound; s <= bound; s += 2) {
      const auto i = static_cast<std::size_t>((s + bound) / 2);
      const int reds = (k + s) / 2;
      const int blacks = k - reds;
      // States no n in the support can produce keep the payoff s.
      if (std::none_of(prior.n.begin(), prior.n.end(),
                       [&](int n) { return reds <= n && blacks <= n; })) {
        t.value[static_cast<std::size_t>(k)][i] = s;
        continue;
      }
      const auto post = posterior_over_n(prior, k, s);
      double p_red = 0.0;
      double p_black = 0.0;
      for (std::size_t j = 0; j < post.size(); ++j) {
        const int n = prior.n[j];
        if (post[j] == 0.0 || 2 * n == k) continue;  // exhausted urn: game ends at s = 0
        p_red += post[j] * (n - reds) / (2.0 * n - k);
        p_black += post[j] * (n - blacks) / (2.0 * n - k);
      }
      double cont = 0.0;
      if (p_red > 0.0) cont += p_red * next_value(next, bound_next, s + 1);
      if (p_black > 0.0) cont += p_black * next_value(next, bound_next, s - 1);
      const bool stop = s >= cont;
      t.stop[static_cast<std::size_t>(k)][i] = stop;
      t.value[static_cast<std::size_t>(k)][i] = stop ? s : cont;
    }
  }
  return UrnPolicy(n_max, std::move(t.value), std::move(t.stop));
}

}  // namespace bridgestop::urn
