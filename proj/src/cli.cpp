#include "bridgestop/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "bridgestop/beta_solver.hpp"
#include "bridgestop/classical.hpp"
#include "bridgestop/errors.hpp"
#include "bridgestop/filter.hpp"
#include "bridgestop/gamma_solver.hpp"
#include "bridgestop/priors.hpp"
#include "bridgestop/simulate.hpp"
#include "bridgestop/urn.hpp"

namespace bridgestop::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands{"solve-classical", "solve-gamma", "solve-beta", "simulate",
                                         "validate",        "urn",         "figures"};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name);
  if (!f) throw ConfigurationError("cannot write " + (dir / name).string());
  f << std::setprecision(12);
  return f;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
  if (used != text.size()) throw DomainError("cannot parse " + what + " from '" + text + "'");
  return v;
}

Prior make_prior(const RunConfig& cfg) {
  const std::string& p = cfg.prior;
  if (p == "gamma") return Prior::gamma_half(cfg.n, cfg.beta);
  if (p == "beta") return Prior::beta_half(cfg.beta);
  if (p.rfind("point:", 0) == 0) return Prior::point_mass(parse_number(p.substr(6), "pinning time"));
  if (p.rfind("table:", 0) == 0) return Prior::from_csv(p.substr(6));
  throw DomainError("unknown prior '" + p + "' (expected gamma, beta, point:<T> or table:<path>)");
}

urn::NPrior parse_urn_prior(const std::string& text) {
  urn::NPrior prior;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DomainError("urn prior entries must read n:weight");
    prior.n.push_back(static_cast<int>(parse_number(item.substr(0, colon), "urn n")));
    prior.weight.push_back(parse_number(item.substr(colon + 1), "urn weight"));
  }
  prior.validate();
  return prior;
}

simulate::StoppingRule make_rule(const RunConfig& cfg, const Prior& prior) {
  const std::string& r = cfg.rule;
  if (r == "immediate") return simulate::StoppingRule::immediate();
  if (r.rfind("constant:", 0) == 0) {
    return simulate::StoppingRule::constant(parse_number(r.substr(9), "rule level"));
  }
  if (r.rfind("sqrt:", 0) == 0) {
    return simulate::StoppingRule::sqrt_horizon(parse_number(r.substr(5), "rule level"),
                                               prior.support_upper());
  }
  if (r != "optimal") throw DomainError("unknown rule '" + r + "'");
  if (const auto* g = std::get_if<GammaHalf>(&prior.kind())) {
    if (g->n != 1) throw DomainError("no optimal rule is known for gamma priors with n >= 2");
    return simulate::StoppingRule::constant(gamma_solver::solve_gamma(g->beta).b);
  }
  if (const auto* b = std::get_if<BetaHalf>(&prior.kind())) {
    beta_solver::BetaSolverOptions opt;
    opt.epsilon = cfg.epsilon;
    opt.z_max = cfg.z_max;
    return simulate::StoppingRule::sqrt_horizon(beta_solver::solve_A(b->beta, opt).A, 1.0);
  }
  if (const auto* p = std::get_if<PointMass>(&prior.kind())) {
    return simulate::StoppingRule::sqrt_horizon(classical::solve_B(), p->at);
  }
  throw DomainError("no optimal rule is known for this prior; pass --rule");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw DomainError("grid needs at least two points");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// ---------------------------------------------------------------------------

void solve_classical(const RunConfig& cfg, std::ostream& report) {
  const classical::ClassicalSolution sol(cfg.horizon);
  report << "B: " << sol.B() << '\n'
         << "B_residual: " << classical::b_equation_residual(sol.B()) << '\n'
         << "T: " << sol.T() << '\n'
         << "V_0_0: " << sol.value(0.0, 0.0) << '\n';
  auto csv = open_output(cfg.out, "solution.csv");
  csv << "x,V\n";
  for (double x : linspace(-2.0, 2.0, cfg.grid)) csv << x << ',' << sol.value(0.0, x) << '\n';
  auto bnd = open_output(cfg.out, "boundary.csv");
  bnd << "t,boundary\n";
  for (double t : linspace(0.0, sol.T(), cfg.grid)) bnd << t << ',' << sol.boundary(t) << '\n';
}

void solve_gamma(const RunConfig& cfg, std::ostream& report) {
  if (cfg.n != 1) throw DomainError("solve-gamma: only n = 1 has a known solution");
  const auto sol = gamma_solver::solve_gamma(cfg.beta);
  const auto res = gamma_solver::verify_fbp_residuals(sol);
  report << "beta: " << sol.beta << '\n'
         << "b: " << sol.b << '\n'
         << "V_0: " << gamma_solver::value_gamma(sol, 0.0) << '\n'
         << "residual_interior_negative: " << res.interior_negative << '\n'
         << "residual_interior_positive: " << res.interior_positive << '\n'
         << "residual_value_matching: " << res.value_matching << '\n'
         << "residual_smooth_pasting: " << res.smooth_pasting << '\n'
         << "residual_continuity: " << res.continuity_at_zero << '\n'
         << "residual_kink: " << res.kink << '\n';
  auto csv = open_output(cfg.out, "solution.csv");
  gamma_solver::write_value_csv(csv, sol, -2.0 * sol.b, 2.0 * sol.b, cfg.grid);
}

void solve_beta(const RunConfig& cfg, std::ostream& report) {
  beta_solver::BetaSolverOptions opt;
  opt.epsilon = cfg.epsilon;
  opt.z_max = cfg.z_max;
  const auto sol = beta_solver::solve_A(cfg.beta, opt);
  const auto res = beta_solver::verify_residuals(sol);
  const auto conv = beta_solver::check_convergence(cfg.beta, opt);
  report << "beta: " << sol.beta << '\n'
         << "A: " << sol.A << '\n'
         << "C: " << sol.C << '\n'
         << "D: " << sol.D << '\n'
         << "C_minus: " << sol.C + sol.D << '\n'
         << "alpha: " << sol.alpha << '\n'
         << "K: " << sol.K << '\n'
         << "V_0_0: " << beta_solver::value_beta(sol, 0.0, 0.0) << '\n'
         << "residual_value_matching: " << res.value_matching << '\n'
         << "residual_smooth_pasting: " << res.smooth_pasting << '\n'
         << "residual_kink: " << res.kink << '\n'
         << "residual_interior_ode: " << res.interior_ode << '\n'
         << "A_refined: " << conv.A_refined << '\n'
         << "convergence_delta: " << conv.delta << '\n'
         << "converged: " << (conv.passed ? "yes" : "no") << '\n';
  auto csv = open_output(cfg.out, "solution.csv");
  beta_solver::write_value_csv(csv, sol, cfg.t0, -2.0, 2.0, cfg.grid);
  auto bnd = open_output(cfg.out, "boundary.csv");
  bnd << "t,boundary\n";
  for (double t : linspace(0.0, 1.0, cfg.grid)) bnd << t << ',' << beta_solver::boundary_beta(sol, t) << '\n';
  if (!conv.passed) {
    throw ConvergenceError("solve-beta: A moved under grid refinement; raise --z-max or lower --epsilon",
                           sol.A, conv.delta);
  }
}

simulate::SimConfig sim_config(const RunConfig& cfg, const Prior& prior) {
  simulate::SimConfig sc;
  sc.n_paths = cfg.paths;
  sc.dt = cfg.dt;
  sc.seed = cfg.seed;
  sc.t0 = cfg.t0;
  sc.x0 = cfg.x0;
  sc.kappa = cfg.kappa;
  sc.prior = prior;
  sc.threads = cfg.threads;
  return sc;
}

void run_simulate(const RunConfig& cfg, std::ostream& report) {
  const Prior prior = make_prior(cfg);
  const auto sc = sim_config(cfg, prior);
  const auto rule = make_rule(cfg, prior);
  report << "prior: " << prior.describe() << '\n' << "rule: " << rule.describe() << '\n';
  auto csv = open_output(cfg.out, "solution.csv");
  csv << "factor,estimate,std_error,ci95_lo,ci95_hi\n";
  if (cfg.probe.empty()) {
    const auto r = simulate::estimate_value(sc, rule);
    simulate::write_report(report, r);
    csv << 1.0 << ',' << r.estimate << ',' << r.std_error << ',' << r.ci95_lo << ',' << r.ci95_hi << '\n';
  } else {
    const auto probe = simulate::optimality_probe(sc, rule, cfg.probe);
    simulate::write_report(report, probe.candidate);
    const auto& c = probe.candidate;
    csv << 1.0 << ',' << c.estimate << ',' << c.std_error << ',' << c.ci95_lo << ',' << c.ci95_hi << '\n';
    for (const auto& row : probe.rows) {
      const auto& r = row.report;
      csv << row.factor << ',' << r.estimate << ',' << r.std_error << ',' << r.ci95_lo << ','
          << r.ci95_hi << '\n';
      report << "gap_x" << row.factor << ": " << row.gap << " (se " << row.gap_se << ")\n";
    }
    report << "candidate_is_max: " << (probe.candidate_is_max ? "yes" : "no") << '\n'
           << "separated: " << (probe.separated ? "yes" : "no") << '\n';
  }
  auto rng = simulate::path_stream(cfg.seed, 0);
  auto path_csv = open_output(cfg.out, "path0.csv");
  simulate::write_path_csv(path_csv, simulate::simulate_path(sc, rng));
}

void run_validate(const RunConfig& cfg, std::ostream& report) {
  const Prior prior = make_prior(cfg);
  const auto sc = sim_config(cfg, prior);
  auto csv = open_output(cfg.out, "solution.csv");
  if (cfg.check == "filter") {
    const auto r = simulate::validate_filter(sc, cfg.t, cfg.bin_lo, cfg.bin_hi);
    report << "check: filter\n"
           << "in_bin: " << r.in_bin << '\n'
           << "sample_mean: " << r.sample_mean << '\n'
           << "sample_se: " << r.sample_se << '\n'
           << "f_bin_average: " << r.f_bin_average << '\n'
           << "f_center: " << r.f_center << '\n'
           << "z_score: " << r.z_score << '\n'
           << "agree: " << (r.agree ? "yes" : "no") << '\n';
    csv << "quantity,value,std_error\n"
        << "sample_mean," << r.sample_mean << ',' << r.sample_se << '\n'
        << "f_bin_average," << r.f_bin_average << ',' << r.f_bin_average_se << '\n'
        << "f_center," << r.f_center << ",0\n";
  } else if (cfg.check == "compensator") {
    const auto r = simulate::validate_compensator(sc, cfg.t, cfg.window);
    report << "check: compensator\n"
           << "survivors: " << r.survivors << '\n'
           << "pin_frequency: " << r.pin_frequency << '\n'
           << "pin_se: " << r.pin_se << '\n'
           << "compensator: " << r.compensator << '\n'
           << "compensator_se: " << r.compensator_se << '\n'
           << "z_score: " << r.z_score << '\n'
           << "agree: " << (r.agree ? "yes" : "no") << '\n';
    csv << "quantity,value,std_error\n"
        << "pin_frequency," << r.pin_frequency << ',' << r.pin_se << '\n'
        << "compensator," << r.compensator << ',' << r.compensator_se << '\n';
  } else {
    throw DomainError("validate: --check must be filter or compensator");
  }
}

void run_urn(const RunConfig& cfg, std::ostream& report) {
  const bool unknown = !cfg.urn_prior.empty();
  const auto policy = unknown ? urn::solve_unknown_n(parse_urn_prior(cfg.urn_prior))
                              : urn::solve_known_n(cfg.n);
  report << "mode: " << (unknown ? "unknown_n" : "known_n") << '\n'
         << "n_max: " << policy.n_max() << '\n'
         << "value_0_0: " << policy.value(0, 0) << '\n'
         << "scaled_value_0_0: " << policy.value(0, 0) / std::sqrt(2.0 * policy.n_max()) << '\n';
  auto csv = open_output(cfg.out, "solution.csv");
  policy.write_csv(csv);
}

// ---------------------------------------------------------------------------

void figure_gamma(const RunConfig& cfg) {
  const std::vector<double> betas{0.25, 0.5, 1.0, 2.0};
  auto csv = open_output(cfg.out, "fig1_gamma_value.csv");
  csv << "x";
  for (double b : betas) csv << ",V_beta_" << b;
  csv << '\n';
  for (double x : linspace(-1.0, 1.5, cfg.grid)) {
    csv << x;
    for (double b : betas) csv << ',' << gamma_solver::value_gamma(gamma_solver::solve_gamma(b), x);
    csv << '\n';
  }
  auto bcsv = open_output(cfg.out, "fig1_gamma_b.csv");
  bcsv << "beta,b\n";
  for (double b : linspace(0.05, 3.0, 60)) bcsv << b << ',' << gamma_solver::solve_gamma(b).b << '\n';
}

void figure_filter(const RunConfig& cfg) {
  const std::vector<double> betas{0.5, 1.0, 1.5, 2.0};
  auto csv = open_output(cfg.out, "fig2_filter.csv");
  csv << "x";
  for (double b : betas) csv << ",f_beta_" << b << ",drift_beta_" << b;
  csv << '\n';
  for (double x : linspace(-3.0, 3.0, cfg.grid)) {
    csv << x;
    for (double b : betas) {
      const auto d = filter::f_beta(b, 0.0, x);
      const double drift = d.is_infinite() ? 0.0 : d.drift;
      csv << ',' << (d.is_infinite() ? INFINITY : d.f_value) << ',' << drift;
    }
    csv << '\n';
  }
}

void figure_beta(const RunConfig& cfg) {
  beta_solver::BetaSolverOptions opt;
  opt.epsilon = cfg.epsilon;
  opt.z_max = cfg.z_max;
  const std::vector<double> betas{0.25, 0.5, 1.0, 2.0};
  std::vector<beta_solver::BetaSolution> sols;
  for (double b : betas) sols.push_back(beta_solver::solve_A(b, opt));
  const classical::ClassicalSolution classic(1.0);
  auto csv = open_output(cfg.out, "fig3_beta_value.csv");
  csv << "x";
  for (double b : betas) csv << ",V_beta_" << b;
  csv << ",V_classical\n";
  for (double x : linspace(-1.5, 1.5, cfg.grid)) {
    csv << x;
    for (const auto& s : sols) csv << ',' << beta_solver::value_beta(s, 0.0, x);
    csv << ',' << classic.value(0.0, x) << '\n';
  }
  auto acsv = open_output(cfg.out, "fig3_beta_A.csv");
  acsv << "beta,A\n";
  for (double b : {0.001, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
    acsv << b << ',' << beta_solver::solve_A(b, opt).A << '\n';
  }
  acsv << "0,B=" << classical::solve_B() << '\n';
}

void run_figures(const RunConfig& cfg, std::ostream& report) {
  const std::string& c = cfg.figure_case;
  if (c != "gamma" && c != "beta" && c != "filter" && c != "all") {
    throw DomainError("figures: --case must be gamma, beta, filter or all");
  }
  if (c == "gamma" || c == "all") figure_gamma(cfg);
  if (c == "filter" || c == "all") figure_filter(cfg);
  if (c == "beta" || c == "all") figure_beta(cfg);
  report << "case: " << c << '\n';
}

void dispatch(const RunConfig& cfg, std::ostream& report) {
  if (cfg.command == "solve-classical") {
    solve_classical(cfg, report);
  } else if (cfg.command == "solve-gamma") {
    solve_gamma(cfg, report);
  } else if (cfg.command == "solve-beta") {
    solve_beta(cfg, report);
  } else if (cfg.command == "simulate") {
    run_simulate(cfg, report);
  } else if (cfg.command == "validate") {
    run_validate(cfg, report);
  } else if (cfg.command == "urn") {
    run_urn(cfg, report);
  } else if (cfg.command == "figures") {
    run_figures(cfg, report);
  } else {
    throw DomainError("unknown command '" + cfg.command + "'");
  }
}

}  // namespace

void write_manifest(std::ostream& out, const RunConfig& cfg) {
  const auto precision = out.precision(17);
  std::string probe;
  for (double f : cfg.probe) {
    std::ostringstream s;
    s << std::setprecision(17) << f;
    probe += (probe.empty() ? "" : " ") + s.str();
  }
  out << "command = " << cfg.command << '\n'
      << "prior = " << cfg.prior << '\n'
      << "beta = " << cfg.beta << '\n'
      << "n = " << cfg.n << '\n'
      << "urn-prior = " << cfg.urn_prior << '\n'
      << "paths = " << cfg.paths << '\n'
      << "dt = " << cfg.dt << '\n'
      << "seed = " << cfg.seed << '\n'
      << "threads = " << cfg.threads << '\n'
      << "t0 = " << cfg.t0 << '\n'
      << "x0 = " << cfg.x0 << '\n'
      << "kappa = " << cfg.kappa << '\n'
      << "horizon = " << cfg.horizon << '\n'
      << "rule = " << cfg.rule << '\n'
      << "probe = " << probe << '\n'
      << "check = " << cfg.check << '\n'
      << "t = " << cfg.t << '\n'
      << "window = " << cfg.window << '\n'
      << "bin-lo = " << cfg.bin_lo << '\n'
      << "bin-hi = " << cfg.bin_hi << '\n'
      << "epsilon = " << cfg.epsilon << '\n'
      << "z-max = " << cfg.z_max << '\n'
      << "case = " << cfg.figure_case << '\n'
      << "grid = " << cfg.grid << '\n'
      << "out = " << cfg.out.string() << '\n';
  out.precision(precision);
}

void run(const RunConfig& cfg, std::ostream& out) {
  fs::create_directories(cfg.out);
  {
    auto manifest = open_output(cfg.out, "manifest.txt");
    write_manifest(manifest, cfg);
  }
  std::ostringstream report;
  report << std::setprecision(12) << "command: " << cfg.command << '\n';
  const auto flush = [&] {
    auto file = open_output(cfg.out, "report.txt");
    file << report.str();
    out << report.str();
  };
  try {
    dispatch(cfg, report);
  } catch (const ConvergenceError&) {
    flush();  // the diagnostic values are worth keeping
    throw;
  }
  flush();
}


int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Optimal stopping of a Brownian bridge with an unknown pinning time"};
  app.add_option("command", cfg.command, "Command to run")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.set_config("--config", "", "Plain key = value file; flags take precedence");
  app.add_option("--prior", cfg.prior, "gamma | beta | point:<T> | table:<path>")->capture_default_str();
  app.add_option("--beta", cfg.beta, "Prior parameter beta")->capture_default_str();
  app.add_option("--n", cfg.n, "Gamma prior index n, or urn size")->capture_default_str();
  app.add_option("--urn-prior", cfg.urn_prior, "Urn prior over n as n:w,n:w,...");
  app.add_option("--paths", cfg.paths, "Monte Carlo paths")->capture_default_str();
  app.add_option("--dt", cfg.dt, "Time step")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (0: all)")->capture_default_str();
  app.add_option("--t0", cfg.t0, "Start time")->capture_default_str();
  app.add_option("--x0", cfg.x0, "Start level")->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "Bridge origin when t0 > 0")->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "Known pinning time for solve-classical")->capture_default_str();
  app.add_option("--rule", cfg.rule, "optimal | constant:<b> | sqrt:<A> | immediate")->capture_default_str();
  app.add_option("--probe", cfg.probe, "Boundary scale factors to compare against");
  app.add_option("--check", cfg.check, "filter | compensator")->capture_default_str();
  app.add_option("--t", cfg.t, "Observation time for validate")->capture_default_str();
  app.add_option("--window", cfg.window, "Window for the compensator check")->capture_default_str();
  app.add_option("--bin-lo", cfg.bin_lo, "Lower edge of the filter bin")->capture_default_str();
  app.add_option("--bin-hi", cfg.bin_hi, "Upper edge of the filter bin")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "Beta solver start point")->capture_default_str();
  app.add_option("--z-max", cfg.z_max, "Beta solver right end")->capture_default_str();
  app.add_option("--case", cfg.figure_case, "gamma | beta | filter | all")->capture_default_str();
  app.add_option("--grid", cfg.grid, "Points per output grid")->capture_default_str();
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidConfig;
  }

  try {
    run(cfg, out);
  } catch (const DomainError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const ConfigurationError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const ConvergenceError& e) {
    err << "numeric failure: " << e.what() << " (best estimate " << e.best_estimate() << ", error "
        << e.error_estimate() << ")\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kSuccess;
}

}  // namespace bridgestop::cli
