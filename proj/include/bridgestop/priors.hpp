#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

namespace bridgestop {

/// Random engine used throughout. Same sequence as std::mt19937_64, but
/// Boost's implementation is markedly faster with GCC's libstdc++.
using Rng = boost::random::mt19937_64;

/// Gamma(n - 1/2, rate beta) pinning-time prior on [0, inf).
struct GammaHalf {
  int n = 1;
  double beta = 0.5;
  double shape() const { return n - 0.5; }
};

/// Beta(1/2, beta) pinning-time prior on [0, 1].
struct BetaHalf {
  double beta = 0.5;
};

/// Piecewise-linear density on an ascending grid; support [grid.front(), grid.back()].
struct Tabulated {
  std::vector<double> grid;
  std::vector<double> density;
  std::vector<double> cdf;  ///< cumulative mass at each grid node
};

/// Known pinning time. Has no density, so the filter rejects it; used to run
/// the classical known-horizon problem through the simulator.
struct PointMass {
  double at = 1.0;
};

/**
 * Prior law of the pinning time. Immutable value type; copies share the
 * tabulated data.
 */
class Prior {
public:
  using Kind = std::variant<GammaHalf, BetaHalf, std::shared_ptr<const Tabulated>, PointMass>;

  static Prior gamma_half(int n, double beta);
  static Prior beta_half(double beta);
  /// Renormalizes the density (warning on stderr if the mass was off by more
  /// than 1e-6). Throws DomainError for malformed grids.
  static Prior tabulated(std::vector<double> grid, std::vector<double> density);
  static Prior point_mass(double at);
  /// Two-column CSV (r, density), optional header row.
  static Prior from_csv(const std::filesystem::path& path);

  double density(double r) const;
  double mean() const;
  double support_lower() const;
  /// +inf for gamma priors.
  double support_upper() const;
  bool has_density() const { return !std::holds_alternative<PointMass>(kind_); }

  /// One draw theta ~ prior using the caller's generator.
  double sample(Rng& rng) const;

  /// Exponent gamma with density ~ (T - r)^{gamma - 1} near a finite upper end.
  double upper_endpoint_exponent() const;

  /**
   * Density expressed in w = (T - r)^gamma (gamma = upper_endpoint_exponent),
   * including the Jacobian |dr/dw|. Smooth and bounded near w = 0 even when
   * the density itself blows up at T.
   */
  double density_upper_substituted(double w) const;

  const Kind& kind() const { return kind_; }
  std::string describe() const;

private:
  explicit Prior(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

}  // namespace bridgestop
