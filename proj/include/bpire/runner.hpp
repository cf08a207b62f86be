#pragma once
// Experiment orchestration: one JSON config (CLI flags override), mandatory
// seeds for stochastic commands, CSV + manifest persistence, and the
// cross-check workflow tying the three R_n routes together.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpire {

struct Tolerances {
  double recursion_rel = 1e-10;   // enumeration vs recursion, relative
  double mc_z = 2.5758293035489;  // 99% two-sided normal quantile
  double exponent_slope = 0.1;    // |fitted slope - (rho - 1)| bound
};

struct ExperimentConfig {
  std::string command;
  std::string preset;                        // preset name, or
  std::optional<std::string> model_file;     // JSON model document
  std::uint64_t n_max = 10;
  std::vector<std::uint64_t> n_grid;         // empty: derived from n_max
  std::uint64_t replicas = 10000;
  std::optional<std::uint64_t> master_seed;  // required by stochastic commands
  unsigned workers = 0;                      // 0: hardware concurrency
  std::string out_dir = "out";

  std::vector<double> x_grid;       // u-function; empty: lattice default
  std::uint64_t n_truncation = 10000;
  bool reflected = false;
  double fit_n_lo = 100.0;
  double fit_n_hi = 10000.0;
  std::string input_csv;            // fit-exponent input
  Tolerances tolerances;
};

// Parse a config document; unknown keys are rejected.
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// Executes the command, writing result CSVs plus manifest.json under
// cfg.out_dir. Throws on invalid configs; returns the exit status (0 = all
// declared tolerances met).
int run_command(const ExperimentConfig& cfg);

// run_command wrapped with machine-readable error reporting: failures print
// one JSON object to stderr and return exit code 2.
int run_with_error_json(const ExperimentConfig& cfg);

}  // namespace bpire
