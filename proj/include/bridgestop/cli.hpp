#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bridgestop::cli {

/// Fully resolved run configuration; every field is echoed to manifest.txt.
struct RunConfig {
  std::string command;
  std::string prior = "gamma";  ///< gamma | beta | point:<T> | table:<path>
  double beta = 0.5;
  int n = 1;                    ///< gamma prior index n, or urn size for the urn command
  std::string urn_prior;        ///< "n:w,n:w,..." for the urn command; overrides n
  std::int64_t paths = 100000;
  double dt = 1e-4;
  std::uint64_t seed = 20240601;
  int threads = 0;
  double t0 = 0.0;
  double x0 = 0.0;
  double kappa = 0.0;
  double horizon = 1.0;         ///< T for solve-classical
  std::string rule = "optimal"; ///< optimal | constant:<b> | sqrt:<A> | immediate
  std::vector<double> probe;    ///< boundary scale factors for simulate
  std::string check = "filter"; ///< filter | compensator, for validate
  double t = 0.3;
  double window = 0.1;
  double bin_lo = 1.9;
  double bin_hi = 2.1;
  double epsilon = 1e-6;
  double z_max = 8.0;
  std::string figure_case = "all";
  int grid = 201;
  std::filesystem::path out = "out";
  std::filesystem::path config;
};

enum ExitCode : int { kSuccess = 0, kInvalidConfig = 1, kNumericFailure = 2 };

/// Parses flags (and the optional key = value config file), runs, and maps
/// errors to exit codes. Diagnostics go to err.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Runs an already resolved configuration; throws on failure.
void run(const RunConfig& cfg, std::ostream& out);

/// Writes manifest.txt content for cfg.
void write_manifest(std::ostream& out, const RunConfig& cfg);

}  // namespace bridgestop::cli
