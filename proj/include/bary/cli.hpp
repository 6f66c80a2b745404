#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bary/models.hpp"

namespace bary {

/// Name of the environment variable holding the default report directory.
inline constexpr const char* kOutDirEnv = "BARY_OUT_DIR";

struct RunConfig {
  std::string subcommand;
  std::string space = "H3";
  std::string grid;  // empty: default grid for the space
  std::uint64_t seed = 0;
  int samples = -1;            // negative: per-subcommand default
  std::string out;             // report path; empty: $BARY_OUT_DIR or stdout
  std::string format = "json";
  bool records = false;  // jac-scan: include per-sample records

  // Subcommand parameters.
  int n = -1;  // negative: per-subcommand default
  int k = -1;
  int from = 3;
  int to = 10;
  double radius = -1.0;  // negative: per-subcommand default
  double horizon = 20.0;
  std::optional<double> uIntegral;
  double volume = 1.0;
  int gridRes = 64;
  int bruteSamples = 100000;
  std::string field = "all";  // bochner: flat | mixed | conformal | all

  // Tolerance overrides.
  std::optional<double> tol;
};

struct RunOutcome {
  int exitCode = 0;
  std::string report;   // rendered in config.format
  std::string path;     // where it was written, empty for stdout
  std::string message;  // diagnostics for stderr
};

/// Subcommands understood by run().
const std::vector<std::string>& subcommands();

/// "H<n>", products of "H<n>" / "R<k>" / "R" factors joined by 'x'
/// (e.g. "H2xR", "H2xH2"), and flat tori "T<n>:<p1>,...,<pn>".
ModelSpace parse_space(const std::string& spec);

/// Runs one subcommand. Exit codes: 0 all asserted invariants hold,
/// 1 property failure (offending sample in the report), 2 argument error.
RunOutcome run(const RunConfig& config);

/// Full command-line entry point (argument parsing, report writing).
int cli_main(int argc, char** argv);

}  // namespace bary
