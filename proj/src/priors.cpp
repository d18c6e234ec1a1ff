#include "bridgestop/priors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "bridgestop/errors.hpp"
#include "bridgestop/numerics.hpp"

namespace bridgestop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double tabulated_density(const Tabulated& tab, double r) {
  const auto& g = tab.grid;
  if (r < g.front() || r > g.back()) return 0.0;
  auto it = std::upper_bound(g.begin(), g.end(), r);
  if (it == g.end()) return tab.density.back();
  const auto i = static_cast<std::size_t>(it - g.begin()) - 1;
  const double w = (r - g[i]) / (g[i + 1] - g[i]);
  return (1.0 - w) * tab.density[i] + w * tab.density[i + 1];
}

}  // namespace

Prior Prior::gamma_half(int n, double beta) {
  if (n < 1) throw DomainError("gamma prior: n must be a positive integer");
  if (!(beta > 0.0)) throw DomainError("gamma prior: beta must be positive");
  return Prior(GammaHalf{n, beta});
}

Prior Prior::beta_half(double beta) {
  if (!(beta > 0.0)) throw DomainError("beta prior: beta must be positive");
  return Prior(BetaHalf{beta});
}

Prior Prior::point_mass(double at) {
  if (!(at > 0.0) || !std::isfinite(at)) throw DomainError("point-mass prior: time must be positive");
  return Prior(PointMass{at});
}

Prior Prior::tabulated(std::vector<double> grid, std::vector<double> density) {
  if (grid.size() < 2 || grid.size() != density.size()) {
    throw DomainError("tabulated prior: need at least two (r, density) pairs");
  }
  if (grid.front() < 0.0) throw DomainError("tabulated prior: pinning times must be non-negative");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(density[i]) || density[i] < 0.0) {
      throw DomainError("tabulated prior: density must be finite and non-negative");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw DomainError("tabulated prior: grid must be strictly ascending");
    }
  }
  double mass = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    mass += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  if (!(mass > 0.0)) throw DomainError("tabulated prior: density has zero mass");
  if (std::abs(mass - 1.0) > 1e-6) {
    std::clog << "warning: tabulated prior mass " << mass << " renormalized to 1\n";
  }
  for (double& d : density) d /= mass;

  auto tab = std::make_shared<Tabulated>();
  tab->cdf.assign(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    tab->cdf[i] = tab->cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  tab->grid = std::move(grid);
  tab->density = std::move(density);
  return Prior(std::shared_ptr<const Tabulated>(std::move(tab)));
}

Prior Prior::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("tabulated prior: cannot open " + path.string());
  std::vector<double> grid;
  std::vector<double> density;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double r;
    double d;
    if (!(fields >> r >> d)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw DomainError("tabulated prior: malformed row '" + line + "'");
    }
    first = false;
    grid.push_back(r);
    density.push_back(d);
  }
  return tabulated(std::move(grid), std::move(density));
}

double Prior::density(double r) const {
  return std::visit(
      Overloaded{
          [r](const GammaHalf& g) {
            if (!(r > 0.0)) return 0.0;
            const double a = g.shape();
            return std::exp(a * std::log(g.beta) - std::lgamma(a) + (a - 1.0) * std::log(r) -
                            g.beta * r);
          },
          [r](const BetaHalf& b) {
            if (!(r > 0.0) || !(r < 1.0)) return 0.0;
            return std::exp((b.beta - 1.0) * std::log1p(-r) - 0.5 * std::log(r) -
                            numerics::log_beta_function(0.5, b.beta));
          },
          [r](const std::shared_ptr<const Tabulated>& t) { return tabulated_density(*t, r); },
          [](const PointMass&) { return 0.0; },
      },
      kind_);
}

double Prior::mean() const {
  return std::visit(
      Overloaded{
          [](const GammaHalf& g) { return g.shape() / g.beta; },
          [](const BetaHalf& b) { return 1.0 / (1.0 + 2.0 * b.beta); },
          [](const std::shared_ptr<const Tabulated>& t) {
            // Exact for the piecewise-linear density.
            double m = 0.0;
            for (std::size_t i = 1; i < t->grid.size(); ++i) {
              const double a = t->grid[i - 1];
              const double b = t->grid[i];
              const double da = t->density[i - 1];
              const double db = t->density[i];
              const double h = b - a;
              m += h * (da * (2.0 * a + b) + db * (a + 2.0 * b)) / 6.0;
            }
            return m;
          },
          [](const PointMass& p) { return p.at; },
      },
      kind_);
}

double Prior::support_lower() const {
  return std::visit(Overloaded{
                        [](const std::shared_ptr<const Tabulated>& t) { return t->grid.front(); },
                        [](const PointMass& p) { return p.at; },
                        [](const auto&) { return 0.0; },
                    },
                    kind_);
}

double Prior::support_upper() const {
  return std::visit(Overloaded{
                        [](const GammaHalf&) { return kInf; },
                        [](const BetaHalf&) { return 1.0; },
                        [](const std::shared_ptr<const Tabulated>& t) { return t->grid.back(); },
                        [](const PointMass& p) { return p.at; },
                    },
                    kind_);
}

double Prior::upper_endpoint_exponent() const {
  if (const auto* b = std::get_if<BetaHalf>(&kind_)) return b->beta;
  return 1.0;
}

double Prior::density_upper_substituted(double w) const {
  if (const auto* b = std::get_if<BetaHalf>(&kind_)) {
    const double d = std::pow(w, 1.0 / b->beta);
    if (!(d < 1.0)) return 0.0;
    return std::exp(-0.5 * std::log1p(-d) - numerics::log_beta_function(0.5, b->beta)) / b->beta;
  }
  return density(support_upper() - w);
}

double Prior::sample(Rng& rng) const {
  return std::visit(
      Overloaded{
          [&rng](const GammaHalf& g) {
            std::exponential_distribution<double> expo(1.0);
            std::normal_distribution<double> normal(0.0, 1.0);
            double s = 0.0;
            for (int i = 1; i < g.n; ++i) s += expo(rng);
            const double z = normal(rng);
            return (s + 0.5 * z * z) / g.beta;
          },
          [&rng](const BetaHalf& b) {
            // theta = X / (X + Y), X ~ Gamma(1/2), Y ~ Gamma(beta).
            std::normal_distribution<double> normal(0.0, 1.0);
            std::gamma_distribution<double> gam(b.beta, 1.0);
            for (;;) {
              const double z = normal(rng);
              const double x = 0.5 * z * z;
              const double y = gam(rng);
              if (!(x > 0.0)) continue;
              const double theta = x / (x + y);
              return std::min(theta, std::nextafter(1.0, 0.0));
            }
          },
          [&rng](const std::shared_ptr<const Tabulated>& t) {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double u = unif(rng) * t->cdf.back();
            auto it = std::upper_bound(t->cdf.begin(), t->cdf.end(), u);
            std::size_t i = it == t->cdf.begin() ? 0 : static_cast<std::size_t>(it - t->cdf.begin()) - 1;
            i = std::min(i, t->grid.size() - 2);
            const double h = t->grid[i + 1] - t->grid[i];
            const double da = t->density[i];
            const double slope = (t->density[i + 1] - da) / h;
            const double m = u - t->cdf[i];
            const double disc = std::max(0.0, da * da + 2.0 * slope * m);
            const double denom = da + std::sqrt(disc);
            const double s = denom > 0.0 ? 2.0 * m / denom : 0.0;
            return t->grid[i] + std::clamp(s, 0.0, h);
          },
          [](const PointMass& p) { return p.at; },
      },
      kind_);
}

std::string Prior::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const GammaHalf& g) { out << "gamma(n=" << g.n << ", beta=" << g.beta << ")"; },
                 [&](const BetaHalf& b) { out << "beta(alpha=0.5, beta=" << b.beta << ")"; },
                 [&](const std::shared_ptr<const Tabulated>& t) {
                   out << "tabulated(" << t->grid.size() << " nodes on [" << t->grid.front()
                       << ", " << t->grid.back() << "])";
                 },
                 [&](const PointMass& p) { out << "point_mass(" << p.at << ")"; },
             },
             kind_);
  return out.str();
}

}  // namespace bridgestop
