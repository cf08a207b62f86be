// bpire command-line runner.
//
// One JSON config file drives a run; explicit flags override config fields.
// Stochastic commands refuse to start without a seed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpire/runner.hpp"

namespace {

struct Cli {
  std::string config_path;
  std::string preset;
  std::string model_file;
  std::string out_dir;
  std::string input_csv;
  std::uint64_t seed = 0;
  std::uint64_t replicas = 0;
  std::uint64_t n_max = 0;
  std::uint64_t n_truncation = 0;
  unsigned workers = 0;
  std::vector<std::uint64_t> n_grid;
  std::vector<double> x_grid;
  double fit_n_lo = 0.0;
  double fit_n_hi = 0.0;
  bool reflected = false;

  bool seed_set = false, replicas_set = false, n_max_set = false;
  bool workers_set = false, out_set = false, trunc_set = false;
  bool lo_set = false, hi_set = false;
};

void add_common(CLI::App* cmd, Cli& cli) {
  cmd->add_option("--config", cli.config_path, "JSON config file");
  cmd->add_option("--preset", cli.preset,
                  "model preset: example2, deterministic-critical, stable(a,b)");
  cmd->add_option("--model", cli.model_file, "model JSON file");
  cmd->add_option("--seed", cli.seed, "master seed (required when stochastic)")
      ->each([&](const std::string&) { cli.seed_set = true; });
  cmd->add_option("--replicas", cli.replicas, "Monte Carlo replicas")
      ->each([&](const std::string&) { cli.replicas_set = true; });
  cmd->add_option("--n-max", cli.n_max, "horizon / series length")
      ->each([&](const std::string&) { cli.n_max_set = true; });
  cmd->add_option("--workers", cli.workers, "worker threads (0 = hardware)")
      ->each([&](const std::string&) { cli.workers_set = true; });
  cmd->add_option("--out", cli.out_dir, "output directory")
      ->each([&](const std::string&) { cli.out_set = true; });
  cmd->add_option("--n-grid", cli.n_grid, "explicit n grid");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical branching processes with immigration stopped at zero"};
  app.require_subcommand(1);

  Cli cli;
  const std::vector<std::string> commands = {
      "simulate-tail", "renewal-exact", "renewal-mc", "walk-ladder",
      "u-function",    "fit-exponent",  "validate",   "crosscheck"};
  const std::vector<std::string> descriptions = {
      "Monte Carlo survival curve of the life period",
      "exact renewal series by enumeration",
      "Monte Carlo renewal series",
      "ladder probabilities P(L_n >= 0)",
      "renewal function U and its harmonic identity",
      "log-log exponent fit of a result CSV",
      "check the model hypotheses",
      "compare enumeration, recursion and Monte Carlo tails"};

  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i], descriptions[i]);
    add_common(cmd, cli);
    if (commands[i] == "walk-ladder") {
      cmd->add_flag("--reflected", cli.reflected, "reflected walk");
    }
    if (commands[i] == "u-function") {
      cmd->add_option("--x-grid", cli.x_grid, "renewal-function grid");
      cmd->add_option("--n-truncation", cli.n_truncation, "series truncation")
          ->each([&](const std::string&) { cli.trunc_set = true; });
    }
    if (commands[i] == "fit-exponent") {
      cmd->add_option("--in", cli.input_csv, "input CSV (n,value[,stderr])");
      cmd->add_option("--n-lo", cli.fit_n_lo, "fit range lower end")
          ->each([&](const std::string&) { cli.lo_set = true; });
      cmd->add_option("--n-hi", cli.fit_n_hi, "fit range upper end")
          ->each([&](const std::string&) { cli.hi_set = true; });
    }
  }

  CLI11_PARSE(app, argc, argv);

  bpire::ExperimentConfig cfg;
  if (!cli.config_path.empty()) {
    std::ifstream in(cli.config_path);
    if (!in) {
      std::cerr << R"({"error":"config_unreadable","path":")" << cli.config_path
                << R"("})" << std::endl;
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      cfg = bpire::config_from_json_text(ss.str());
    } catch (const std::exception& e) {
      std::cerr << R"({"error":"config_invalid","detail":")" << e.what()
                << R"("})" << std::endl;
      return 2;
    }
  }

  // Flags override config fields.
  cfg.command = app.get_subcommands().front()->get_name();
  if (!cli.preset.empty()) cfg.preset = cli.preset;
  if (!cli.model_file.empty()) cfg.model_file = cli.model_file;
  if (cli.seed_set) cfg.master_seed = cli.seed;
  if (cli.replicas_set) cfg.replicas = cli.replicas;
  if (cli.n_max_set) cfg.n_max = cli.n_max;
  if (cli.workers_set) cfg.workers = cli.workers;
  if (cli.out_set) cfg.out_dir = cli.out_dir;
  if (cli.trunc_set) cfg.n_truncation = cli.n_truncation;
  if (!cli.n_grid.empty()) cfg.n_grid = cli.n_grid;
  if (!cli.x_grid.empty()) cfg.x_grid = cli.x_grid;
  if (!cli.input_csv.empty()) cfg.input_csv = cli.input_csv;
  if (cli.lo_set) cfg.fit_n_lo = cli.fit_n_lo;
  if (cli.hi_set) cfg.fit_n_hi = cli.fit_n_hi;
  if (cli.reflected) cfg.reflected = true;

  const int status = bpire::run_with_error_json(cfg);
  if (status == 0) {
    std::cout << "ok: results under " << cfg.out_dir << std::endl;
  }
  return status;
}
