#pragma once

#include <iosfwd>
#include <vector>

namespace bridgestop::urn {

/**
 * Finite prior over n, the number of red (and of black) balls; the urn holds
 * 2n balls. Weights need not be normalized.
 */
struct NPrior {
  std::vector<int> n;
  std::vector<double> weight;

  static NPrior degenerate(int n);
  /// Throws DomainError for empty support, n < 1, repeated n or non-positive total weight.
  void validate() const;
  int n_max() const;
  double mean() const;
};

enum class Action { stop, go_on };

/**
 * Optimal policy over states (k, s): k balls drawn, s = reds minus blacks.
 * Only states reachable for some n in the support are stored:
 * |s| <= min(k, 2 n_max - k) with s = k (mod 2).
 */
class UrnPolicy {
public:
  UrnPolicy(int n_max, std::vector<std::vector<double>> value, std::vector<std::vector<char>> stop);

  int n_max() const { return n_max_; }
  int k_max() const { return 2 * n_max_; }
  bool feasible(int k, int s) const;

  /// Throws InternalError for a state outside the table.
  double value(int k, int s) const;
  Action action(int k, int s) const;

  /// Smallest s at which the policy stops after k draws (k < k_max); the
  /// largest feasible s plus 2 if it never stops there.
  int min_stop_level(int k) const;

  /// CSV rows (k, s, action, value).
  void write_csv(std::ostream& out) const;

private:
  std::size_t index(int k, int s) const;
  int s_bound(int k) const;

  int n_max_;
  std::vector<std::vector<double>> value_;
  std::vector<std::vector<char>> stop_;
};

/// Backward induction for a known n (n <= 5000); red drawn with probability (n - r) / (2n - k).
UrnPolicy solve_known_n(int n);

/**
 * Backward induction when n is unknown (n_max <= 2000). The posterior over n
 * after k draws depends on (k, s) only, since every ordering of the same
 * colour counts has the same likelihood. A draw from an empty urn is
 * observed, so an exhausted urn (2n == k) ends the game at payoff s = 0.
 */
UrnPolicy solve_unknown_n(const NPrior& prior);

/// Posterior weights over prior.n after k draws with sum s; zero for infeasible n.
/// Throws DomainError if no n in the support is consistent with (k, s).
std::vector<double> posterior_over_n(const NPrior& prior, int k, int s);

}  // namespace bridgestop::urn
