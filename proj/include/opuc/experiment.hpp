#pragma once

// Config-driven experiment harness behind the CLI. A single JSON document
// selects a scenario, a coefficient sequence, point-mass parameters, horizons
// and tolerance gates; each run writes a deterministic CSV table plus a JSON
// summary and reports pass/fail through the process exit status.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opuc/coeffs.hpp"
#include "opuc/pointmass.hpp"

namespace opuc {

enum class Scenario {
  theorem1,     // single/multi point mass on a BV sequence: Delta_n limits
  theorem2,     // periodic background: per-residue limits
  theorem3,     // twisted background: zeta^n Delta_n limit
  corollary1,   // rate extraction (Delta_n + 2L)/c_n at zeta = 1
  appendix,     // Jacobi -> sieved OPUC pipeline
  oracle_check, // cross-method equivalence incl. the Levinson moment oracle
  bands,        // band/gap geometry of a periodic background
};

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);

struct JacobiConfig {
  std::string family = "constant_one";  // constant_one | power | geometric
  double exponent = 0.6;                // power family: a_n = 1 - (n+1)^{-exponent}
  double y = 1.0;                       // scaling parameter in (0, 2]
};

struct GridEntry {
  std::string key;       // unique, used for output naming and merge order
  std::string overrides; // JSON object text merged over the base document
};

struct ExperimentConfig {
  Scenario scenario = Scenario::theorem1;
  SequenceSpec sequence;
  std::vector<PointMassSpec> points;  // applied sequentially when > 1
  std::int64_t n_max = 1000;
  std::vector<std::int64_t> checkpoints;         // sorted ascending, <= n_max
  std::map<std::string, double> tolerances;      // named gates, all > 0
  int period = 1;                                // theorem2 block length
  JacobiConfig jacobi;                           // appendix scenario
  std::vector<GridEntry> grid;                   // optional parameter fan-out
};

// Parse + validate a JSON document (text). Throws ConfigError with a
// human-readable reason on any malformed or out-of-range field.
ExperimentConfig parse_config(const std::string& json_text);

// Result of one scenario execution: the rendered CSV table, the summary as
// JSON text, and whether every tolerance gate passed.
struct RunResult {
  std::string table_csv;
  std::string summary_json;
  bool all_gates_passed = true;
};

// Execute one parsed config (no grid fan-out at this level).
RunResult run_scenario(const ExperimentConfig& cfg);

// Top-level driver: handles the grid fan-out across `jobs` worker threads,
// writes table[_key].csv and summary.json under out_dir, and returns the
// process exit status (0 iff every gate of every grid entry passed).
int run_experiment(const std::string& config_text, const std::string& out_dir,
                   int jobs);

// Map an exception to the short name printed on stderr (exit-path contract).
std::string error_name(const std::exception& e);

// Fixed-format helpers shared with tests: 17 significant digits, C locale.
std::string format_g17(double v);

}  // namespace opuc
