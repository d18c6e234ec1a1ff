#include "bridgestop/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace bridgestop::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace

// ---------------------------------------------------------------------------
// Normal distribution

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double mills_ratio(double w) {
  if (w < 5.0) {
    return normal_sf(w) / normal_pdf(w);
  }
  // R(w) = 1/(w + 1/(w + 2/(w + 3/(w + ...)))), modified Lentz.
  const double tiny = 1e-300;
  double f = w;
  double c = w;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = w + k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = w + k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

double scaled_normal_cdf(double x) {
  if (x > -5.0) {
    return std::exp(0.5 * x * x) * normal_cdf(x);
  }
  return mills_ratio(-x) / kSqrt2Pi;
}

// ---------------------------------------------------------------------------
// Bessel K of half-integer order

double bessel_k_half_scaled(int order_index, double x) {
  if (!(x > 0.0)) {
    throw DomainError("bessel_k_half: argument must be positive");
  }
  if (order_index < 0) {
    throw DomainError("bessel_k_half: order index must be non-negative");
  }
  // e^x K_{1/2}(x) = sqrt(pi / (2x)); upward recurrence is stable for K.
  double km = std::sqrt(kPi / (2.0 * x));
  if (order_index == 0) return km;
  double k = km * (1.0 + 1.0 / x);
  for (int m = 1; m < order_index; ++m) {
    const double nu = m + 0.5;
    const double next = km + (2.0 * nu / x) * k;
    km = k;
    k = next;
  }
  return k;
}

double bessel_k_half(int order_index, double x) {
  return std::exp(-x) * bessel_k_half_scaled(order_index, x);
}

// ---------------------------------------------------------------------------
// Quadrature

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw DomainError("QuadratureSpec: tolerances must be strictly positive");
  }
  if (max_subdivisions < 1) {
    throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
  }
}

namespace {

// 21-point Kronrod extension of the 10-point Gauss rule.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525210617, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod_21(const ScalarFn& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  double abs_sum = std::abs(kronrod);
  std::array<double, 21> fv{};
  fv[10] = fc;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[j] = f1;
    fv[20 - j] = f2;
    kronrod += kWgk[j] * (f1 + f2);
    abs_sum += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) {
      gauss += kWg[j / 2] * (f1 + f2);
    }
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) {
    asc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[20 - j] - mean));
  }
  const double result = kronrod * half;
  const double resabs = abs_sum * std::abs(half);
  const double resasc = asc * std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  // QUADPACK error scaling.
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  if (!std::isfinite(result)) {
    err = kInf;
  }
  return Panel{a, b, result, err};
}

}  // namespace

QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b,
                                    const QuadratureSpec& spec) {
  spec.validate();
  if (a == b) return {};
  if (std::isinf(b)) {
    if (std::isinf(a)) {
      throw DomainError("integrate_adaptive: lower limit must be finite");
    }
    const double sign = b > 0 ? 1.0 : -1.0;
    ScalarFn mapped = [&f, a, sign](double v) {
      const double one_minus = 1.0 - v;
      if (one_minus <= 0.0) return 0.0;
      const double x = a + sign * v / one_minus;
      const double value = f(x);
      if (value == 0.0) return 0.0;
      return sign * value / (one_minus * one_minus);
    };
    return integrate_adaptive(mapped, 0.0, 1.0, spec);
  }

  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod_21(f, a, b);
  double total = first.value;
  double total_err = first.error;
  panels.push(first);
  int subdivisions = 0;
  auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

  while (total_err > tolerance()) {
    if (subdivisions >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "integrate_adaptive: no convergence after " << subdivisions
          << " subdivisions (estimate " << total << ", error " << total_err << ")";
      throw ConvergenceError(msg.str(), total, total_err);
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {
      // Panel cannot be split further in double precision; accept it.
      total_err -= worst.error;
      panels.push(Panel{worst.a, worst.b, worst.value, 0.0});
      if (panels.top().error == 0.0) break;
      continue;
    }
    const Panel left = gauss_kronrod_21(f, worst.a, mid);
    const Panel right = gauss_kronrod_21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
    if (!std::isfinite(total)) {
      throw ConvergenceError("integrate_adaptive: non-finite integrand", total, kInf);
    }
  }

  // Re-sum to shed the drift accumulated by incremental updates.
  double value = 0.0;
  double err = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    err += panels.top().error;
    panels.pop();
  }
  return QuadratureResult{value, err, subdivisions};
}

double integrate(const ScalarFn& f, double a, double b, const QuadratureSpec& spec) {
  return integrate_adaptive(f, a, b, spec).value;
}

// ---------------------------------------------------------------------------
// Tricomi U

double tricomi_u(double p, double q, double y) {
  if (!(p > 0.0) || !(y > 0.0)) {
    throw DomainError("tricomi_u: requires p > 0 and y > 0");
  }
  const QuadratureSpec spec{1e-300, 1e-13, 4000};
  const double c = q - p - 1.0;

  // (0, 1): u^{p-1} h(u), h(u) = (1+u)^c e^{-y u}.
  double head;
  if (p < 1.0) {
    const double inv_p = 1.0 / p;
    head = inv_p * integrate(
                       [&](double w) {
                         const double u = std::pow(w, inv_p);
                         return std::exp(c * std::log1p(u) - y * u);
                       },
                       0.0, 1.0, spec);
  } else {
    head = integrate(
        [&](double u) { return std::exp((p - 1.0) * std::log(u) + c * std::log1p(u) - y * u); },
        0.0, 1.0, spec);
  }

  // (1, inf) with u = e^s.
  auto tail_integrand = [&](double s) {
    const double u = std::exp(s);
    const double log1pu = s + std::log1p(std::exp(-s));
    return std::exp(s * p + c * log1pu - y * u);
  };
  const double s_split = std::max(1.0, std::log(1.0 / y));
  const double tail = integrate(tail_integrand, 0.0, s_split, spec) +
                      integrate(tail_integrand, s_split, kInf, spec);

  return std::exp(std::log(head + tail) - std::lgamma(p));
}

// ---------------------------------------------------------------------------
// Root finding

double find_root_monotone(const ScalarFn& f, const RootBracket& bracket) {
  if (!(bracket.lo < bracket.hi)) {
    throw BracketError("find_root_monotone: requires lo < hi");
  }
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream msg;
    msg << "find_root_monotone: no sign change on [" << a << ", " << b << "] (f = " << fa
        << ", " << fb << ")";
    throw BracketError(msg.str());
  }
  const double tol = std::max(bracket.tol, 0.0);

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      return b;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeTrajectory ode_integrate(const OdeRhs& rhs, double z0, double z1, std::vector<double> state0,
                            std::span<const double> nodes, const OdeOptions& options) {
  const std::size_t n = state0.size();
  const double direction = z1 >= z0 ? 1.0 : -1.0;
  OdeTrajectory out;

  std::vector<double> targets;
  if (nodes.empty()) {
    targets.push_back(z1);
  } else {
    for (double node : nodes) {
      if ((node - z0) * direction < 0.0 || (node - z1) * direction > 0.0) {
        throw DomainError("ode_integrate: output node outside the integration interval");
      }
      if (!targets.empty() && (node - targets.back()) * direction < 0.0) {
        throw DomainError("ode_integrate: output nodes must be monotone");
      }
      targets.push_back(node);
    }
  }

  std::vector<double> y = std::move(state0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  double z = z0;
  rhs(z, y, k1);

  const bool record_all = nodes.empty();
  if (record_all) {
    out.z.push_back(z);
    out.y.push_back(y);
  }

  double h = options.initial_step > 0.0 ? options.initial_step : std::abs(z1 - z0) / 100.0;
  if (h == 0.0) h = 1e-3;
  std::size_t next = 0;
  while (next < targets.size() && targets[next] == z) {
    out.z.push_back(z);
    out.y.push_back(y);
    ++next;
  }

  long steps = 0;
  while (next < targets.size()) {
    const double target = targets[next];
    const double remaining = std::abs(target - z);
    bool hits_target = false;
    double step = h;
    if (step >= remaining) {
      step = remaining;
      hits_target = true;
    }
    const double hs = direction * step;

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    rhs(z + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(z + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(z + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(z + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double znew = hits_target ? target : z + hs;
    rhs(z + hs, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(znew, ynew, k7);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei =
          hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          options.abs_tol + options.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(ei) / scale);
      finite = finite && std::isfinite(ynew[i]);
    }
    if (!finite) err = kInf;

    if (err <= 1.0) {
      z = znew;
      y.swap(ynew);
      k1.swap(k7);
      ++out.accepted_steps;
      if (record_all) {
        out.z.push_back(z);
        out.y.push_back(y);
      }
      if (hits_target) {
        while (next < targets.size() && targets[next] == z) {
          if (!record_all) {
            out.z.push_back(z);
            out.y.push_back(y);
          }
          ++next;
        }
      }
      const double factor = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
      // A step shortened to land on a node says nothing about the natural step.
      if (!hits_target || step >= h) h = step * std::max(0.2, factor);
    } else {
      ++out.rejected_steps;
      const double factor = std::isfinite(err) ? std::max(0.1, 0.9 * std::pow(err, -0.25)) : 0.1;
      h = step * factor;
    }
    if (h < options.min_step * std::max(1.0, std::abs(z))) {
      std::ostringstream msg;
      msg << "ode_integrate: step size underflow at z = " << z;
      throw StiffnessError(msg.str());
    }
    if (++steps > options.max_steps) {
      throw StiffnessError("ode_integrate: step budget exhausted");
    }
  }
  return out;
}

OdeTrajectory ode_integrate(const OdeRhs& rhs, double z0, double z1, std::vector<double> state0,
                            double step_tol) {
  OdeOptions options;
  options.rel_tol = step_tol;
  options.abs_tol = step_tol;
  const std::array<double, 1> end{z1};
  return ode_integrate(rhs, z0, z1, std::move(state0), end, options);
}

// ---------------------------------------------------------------------------

double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bridgestop::numerics
