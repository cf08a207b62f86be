#include "bpire/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bpire/analyze.hpp"
#include "bpire/csvio.hpp"
#include "bpire/envmodel.hpp"
#include "bpire/hypotheses.hpp"
#include "bpire/renewal.hpp"
#include "bpire/simulate.hpp"
#include "bpire/version.hpp"
#include "bpire/walk.hpp"

namespace bpire {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {
    "simulate-tail", "renewal-exact", "renewal-mc", "walk-ladder",
    "u-function",    "fit-exponent",  "validate",   "crosscheck"};

const std::set<std::string> kStochastic = {"simulate-tail", "renewal-mc",
                                           "walk-ladder", "u-function",
                                           "crosscheck"};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

EnvironmentModel resolve_model(const ExperimentConfig& cfg) {
  if (cfg.model_file) {
    std::ifstream in(*cfg.model_file);
    if (!in) throw ConfigError("cannot open model file " + *cfg.model_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json_text(ss.str());
  }
  if (cfg.preset.empty()) {
    throw ConfigError("no model: give a preset name or a model file");
  }
  return preset_model(cfg.preset);
}

// 1..64 then log-spaced up to n_max; unique and sorted.
std::vector<std::uint64_t> default_n_grid(std::uint64_t n_max) {
  std::set<std::uint64_t> grid;
  for (std::uint64_t n = 1; n <= std::min<std::uint64_t>(n_max, 64); ++n) {
    grid.insert(n);
  }
  if (n_max > 64) {
    const int points = 64;
    const double lo = std::log(64.0), hi = std::log(double(n_max));
    for (int i = 0; i <= points; ++i) {
      const double v = std::exp(lo + (hi - lo) * double(i) / points);
      grid.insert(std::min<std::uint64_t>(n_max, std::uint64_t(std::llround(v))));
    }
    grid.insert(n_max);
  }
  return {grid.begin(), grid.end()};
}

std::vector<double> default_x_grid(const EnvironmentModel& model) {
  const auto step = model.max_abs_increment();
  const double a = (step && *step > 0.0) ? *step : 1.0;
  std::vector<double> g;
  for (int k = 0; k <= 5; ++k) g.push_back(a * k);
  return g;
}

struct RunContext {
  fs::path dir;
  json outputs = json::array();

  void save_csv(const CsvWriter& csv, const std::string& name) {
    const fs::path p = dir / name;
    csv.save(p);
    outputs.push_back({{"file", name}, {"sha256", sha256_file(p)}});
  }
  void save_json(const json& j, const std::string& name) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << j.dump(2) << '\n';
    out.close();
    outputs.push_back({{"file", name}, {"sha256", sha256_file(p)}});
  }
};

json tail_to_json(const TailEstimate& est) {
  return json{{"replicas", est.replicas},
              {"saturated_fraction", est.saturated_fraction},
              {"saturation_warning", est.saturation_warning}};
}

CsvWriter tail_csv(const TailEstimate& est) {
  CsvWriter csv({"n", "survival", "stderr", "replicas", "saturated_fraction"});
  for (std::size_t i = 0; i < est.n_grid.size(); ++i) {
    csv.row({est.n_grid[i], est.survival[i], est.stderr_[i], est.replicas,
             est.saturated_fraction});
  }
  return csv;
}

CsvWriter renewal_csv(const RenewalSeries& s) {
  if (s.backend == RenewalBackend::exact_enumeration) {
    CsvWriter csv({"n", "d", "h", "h_star", "r_recursion", "r_enumeration"});
    for (int n = 0; n <= s.n_max; ++n) {
      csv.row({std::uint64_t(n), s.d[std::size_t(n)],
               n < s.n_max ? s.h[std::size_t(n)] : std::nan(""),
               n < s.n_max ? s.h_star[std::size_t(n)] : std::nan(""),
               n >= 1 ? s.r[std::size_t(n) - 1] : std::nan(""),
               s.r_enumeration[std::size_t(n)]});
    }
    return csv;
  }
  CsvWriter csv({"n", "d", "d_stderr", "d_isotonic", "h", "h_star",
                 "h_star_stderr", "r_recursion"});
  for (int n = 0; n <= s.n_max; ++n) {
    csv.row({std::uint64_t(n), s.d[std::size_t(n)], s.d_stderr[std::size_t(n)],
             s.d_isotonic[std::size_t(n)],
             n < s.n_max ? s.h[std::size_t(n)] : std::nan(""),
             n < s.n_max ? s.h_star[std::size_t(n)] : std::nan(""),
             n < s.n_max ? s.h_star_stderr[std::size_t(n)] : std::nan(""),
             n >= 1 ? s.r[std::size_t(n) - 1] : std::nan("")});
  }
  return csv;
}

json a2_to_json(const A2Report& rep) {
  return json{{"pass", rep.pass},
              {"worst_margin", rep.worst_margin},
              {"worst_s", rep.worst_s},
              {"kappa_margin", rep.kappa_margin},
              {"grid_min", rep.grid_min},
              {"analytic_available", rep.analytic_available}};
}

json a3_to_json(const A3Report& rep) {
  const char* status = rep.status == A3Report::Status::pass ? "pass"
                       : rep.status == A3Report::Status::fail ? "fail"
                                                              : "unverified";
  json j{{"status", status},
         {"epsilon", rep.epsilon},
         {"nonlattice_assumed", rep.nonlattice_assumed},
         {"note", rep.note}};
  if (rep.rho_used) j["rho_used"] = *rep.rho_used;
  return j;
}

int cmd_validate(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  const A2Report a2 = validate_hypothesis_A2(model);
  const A3Report a3 = validate_hypothesis_A3(model);
  json j{{"model", json::parse(model_to_json_text(model))},
         {"hypothesis_a2", a2_to_json(a2)},
         {"hypothesis_a3", a3_to_json(a3)}};
  ctx.save_json(j, "validate.json");
  const bool ok = a2.pass && a3.status != A3Report::Status::fail;
  return ok ? 0 : 1;
}

int cmd_simulate_tail(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  auto grid = cfg.n_grid.empty() ? default_n_grid(cfg.n_max) : cfg.n_grid;
  TailEstimate est = estimate_tail(model, grid, cfg.replicas, *cfg.master_seed,
                                   cfg.workers);
  ctx.save_csv(tail_csv(est), "tail.csv");
  ctx.save_json(tail_to_json(est), "tail_summary.json");
  return 0;
}

int cmd_renewal_exact(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  RenewalSeries s = exact_series(model, int(cfg.n_max));
  ctx.save_csv(renewal_csv(s), "renewal.csv");
  double worst = 0.0;
  for (int n = 1; n <= s.n_max; ++n) {
    const double rel = std::abs(s.r[std::size_t(n) - 1] - s.r_enumeration[std::size_t(n)]) /
                       s.r_enumeration[std::size_t(n)];
    worst = std::max(worst, rel);
  }
  ctx.save_json(json{{"recursion_vs_enumeration_max_rel", worst},
                     {"series_identity_residual",
                      check_series_identity(s, s.n_max)}},
                "renewal_summary.json");
  return worst <= cfg.tolerances.recursion_rel ? 0 : 1;
}

int cmd_renewal_mc(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  RenewalSeries s = mc_series(model, int(cfg.n_max), cfg.replicas,
                              *cfg.master_seed, cfg.workers);
  ctx.save_csv(renewal_csv(s), "renewal.csv");
  ctx.save_json(json{{"replicas", s.replicas},
                     {"isotonic_distance", s.isotonic_distance}},
                "renewal_summary.json");
  return 0;
}

int cmd_walk_ladder(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  auto grid = cfg.n_grid.empty() ? default_n_grid(cfg.n_max) : cfg.n_grid;
  auto est = ladder_probability(model, grid, cfg.replicas, *cfg.master_seed,
                                cfg.workers, cfg.reflected);
  CsvWriter csv({"n", "estimate", "stderr", "replicas"});
  for (const auto& p : est) {
    csv.row({p.n, p.estimate, p.stderr_, cfg.replicas});
  }
  ctx.save_csv(csv, "ladder.csv");
  return 0;
}

int cmd_u_function(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  auto grid = cfg.x_grid.empty() ? default_x_grid(model) : cfg.x_grid;
  RenewalFunctionEstimate u = estimate_U(model, grid, cfg.n_truncation,
                                         cfg.replicas, *cfg.master_seed,
                                         cfg.workers);
  CsvWriter csv({"x", "U", "stderr"});
  for (std::size_t i = 0; i < u.x_grid.size(); ++i) {
    csv.row({u.x_grid[i], u.u_values[i], u.std_errors[i]});
  }
  ctx.save_csv(csv, "u.csv");

  // harmonic identity on the covered part of the grid
  std::vector<double> check_grid;
  const auto step = model.max_abs_increment();
  for (double x : u.x_grid) {
    if (!step || x + *step <= u.x_grid.back() + 1e-12) check_grid.push_back(x);
  }
  auto harmonic = check_harmonic_identity(model, u, check_grid, cfg.replicas,
                                          *cfg.master_seed, cfg.workers);
  CsvWriter hcsv({"x", "lhs", "u_at_x", "discrepancy", "stderr_combined",
                  "pass", "coverage_flagged"});
  bool all_pass = true;
  for (const auto& p : harmonic) {
    all_pass = all_pass && p.pass;
    hcsv.row({p.x, p.lhs, p.u_at_x, p.discrepancy, p.combined_stderr,
              std::uint64_t(p.pass), std::uint64_t(p.coverage_flagged)});
  }
  ctx.save_csv(hcsv, "harmonic.csv");
  ctx.save_json(json{{"n_truncation", u.n_truncation},
                     {"tail_estimate", u.tail_estimate},
                     {"tail_flagged", u.tail_flagged},
                     {"harmonic_all_pass", all_pass}},
                "u_summary.json");
  return all_pass ? 0 : 1;
}

int cmd_fit_exponent(const ExperimentConfig& cfg, RunContext& ctx) {
  if (cfg.input_csv.empty()) {
    throw ConfigError("fit-exponent: input_csv required");
  }
  const CsvTable table = read_csv(cfg.input_csv);
  const int ncol = table.column("n");
  int vcol = -1;
  for (const char* name : {"survival", "estimate", "d", "value"}) {
    vcol = table.column(name);
    if (vcol >= 0) break;
  }
  int ecol = table.column("stderr");
  if (ecol < 0) ecol = table.column("d_stderr");
  if (ncol < 0 || vcol < 0) {
    throw ConfigError("fit-exponent: input needs 'n' and a value column");
  }
  std::vector<SeriesPoint> series;
  for (const auto& row : table.rows) {
    SeriesPoint p;
    p.n = std::stod(row[std::size_t(ncol)]);
    p.value = std::stod(row[std::size_t(vcol)]);
    p.stderr_ = ecol >= 0 ? std::stod(row[std::size_t(ecol)]) : 0.0;
    series.push_back(p);
  }
  const ExponentFit fit = fit_exponent(series, cfg.fit_n_lo, cfg.fit_n_hi);
  json windows = json::array();
  for (const auto& w : fit.local_slopes) {
    windows.push_back({{"n_lo", w.n_lo},
                       {"n_hi", w.n_hi},
                       {"slope", w.slope},
                       {"stderr", w.stderr_}});
  }
  ctx.save_json(json{{"n_lo", fit.n_lo},
                     {"n_hi", fit.n_hi},
                     {"slope", fit.slope},
                     {"slope_stderr", fit.slope_stderr},
                     {"intercept", fit.intercept},
                     {"local_slopes", windows},
                     {"drift_flag", fit.drift_flag},
                     {"excluded_n", fit.excluded_n}},
                "fit.json");
  return 0;
}

int cmd_crosscheck(const ExperimentConfig& cfg, RunContext& ctx) {
  const EnvironmentModel model = resolve_model(cfg);
  RenewalSeries s = exact_series(model, int(cfg.n_max));
  ctx.save_csv(renewal_csv(s), "renewal.csv");

  std::vector<std::uint64_t> grid;
  for (std::uint64_t n = 1; n <= cfg.n_max; ++n) grid.push_back(n);
  TailEstimate tail = estimate_tail(model, grid, cfg.replicas,
                                    *cfg.master_seed, cfg.workers);
  ctx.save_csv(tail_csv(tail), "tail.csv");

  json rows = json::array();
  bool ok = true;
  for (std::uint64_t n = 1; n <= cfg.n_max; ++n) {
    const double exact = s.r_enumeration[std::size_t(n)];
    const double rec = s.r[std::size_t(n) - 1];
    const double mc = tail.survival[std::size_t(n) - 1];
    const double se = tail.stderr_[std::size_t(n) - 1];
    const double rec_rel = std::abs(rec - exact) / exact;
    const bool rec_ok = rec_rel <= cfg.tolerances.recursion_rel;
    const bool mc_ok = std::abs(mc - exact) <= cfg.tolerances.mc_z * se;
    ok = ok && rec_ok && mc_ok;
    rows.push_back({{"n", n},
                    {"r_enumeration", exact},
                    {"r_recursion", rec},
                    {"r_monte_carlo", mc},
                    {"mc_stderr", se},
                    {"recursion_rel_err", rec_rel},
                    {"recursion_ok", rec_ok},
                    {"monte_carlo_ok", mc_ok}});
  }
  ctx.save_json(json{{"rows", rows},
                     {"series_identity_residual", check_series_identity(s, s.n_max)},
                     {"all_ok", ok}},
                "crosscheck.json");
  return ok ? 0 : 1;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") cfg.command = value.get<std::string>();
    else if (key == "preset") cfg.preset = value.get<std::string>();
    else if (key == "model_file") cfg.model_file = value.get<std::string>();
    else if (key == "n_max") cfg.n_max = value.get<std::uint64_t>();
    else if (key == "n_grid") cfg.n_grid = value.get<std::vector<std::uint64_t>>();
    else if (key == "replicas") cfg.replicas = value.get<std::uint64_t>();
    else if (key == "master_seed") cfg.master_seed = value.get<std::uint64_t>();
    else if (key == "workers") cfg.workers = value.get<unsigned>();
    else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
    else if (key == "x_grid") cfg.x_grid = value.get<std::vector<double>>();
    else if (key == "n_truncation") cfg.n_truncation = value.get<std::uint64_t>();
    else if (key == "reflected") cfg.reflected = value.get<bool>();
    else if (key == "fit_n_lo") cfg.fit_n_lo = value.get<double>();
    else if (key == "fit_n_hi") cfg.fit_n_hi = value.get<double>();
    else if (key == "input_csv") cfg.input_csv = value.get<std::string>();
    else if (key == "tolerances") {
      const json& t = value;
      cfg.tolerances.recursion_rel = t.value("recursion_rel", cfg.tolerances.recursion_rel);
      cfg.tolerances.mc_z = t.value("mc_z", cfg.tolerances.mc_z);
      cfg.tolerances.exponent_slope = t.value("exponent_slope", cfg.tolerances.exponent_slope);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j{{"command", cfg.command},
         {"n_max", cfg.n_max},
         {"replicas", cfg.replicas},
         {"workers", cfg.workers},
         {"out_dir", cfg.out_dir},
         {"n_truncation", cfg.n_truncation},
         {"reflected", cfg.reflected},
         {"fit_n_lo", cfg.fit_n_lo},
         {"fit_n_hi", cfg.fit_n_hi},
         {"tolerances",
          {{"recursion_rel", cfg.tolerances.recursion_rel},
           {"mc_z", cfg.tolerances.mc_z},
           {"exponent_slope", cfg.tolerances.exponent_slope}}}};
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  if (cfg.model_file) j["model_file"] = *cfg.model_file;
  if (!cfg.n_grid.empty()) j["n_grid"] = cfg.n_grid;
  if (cfg.master_seed) j["master_seed"] = *cfg.master_seed;
  if (!cfg.x_grid.empty()) j["x_grid"] = cfg.x_grid;
  if (!cfg.input_csv.empty()) j["input_csv"] = cfg.input_csv;
  return j.dump(2);
}

int run_command(const ExperimentConfig& cfg) {
  if (!kCommands.count(cfg.command)) {
    throw std::invalid_argument("unknown command '" + cfg.command + "'");
  }
  if (kStochastic.count(cfg.command) && !cfg.master_seed) {
    throw std::invalid_argument(
        "command '" + cfg.command +
        "' is stochastic: master_seed is required (no time-based seeding)");
  }
  if (cfg.replicas < 1 || cfg.n_max < 1) {
    throw std::invalid_argument("replicas and n_max must be >= 1");
  }

  RunContext ctx;
  ctx.dir = cfg.out_dir;
  fs::create_directories(ctx.dir);

  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  if (cfg.command == "validate") status = cmd_validate(cfg, ctx);
  else if (cfg.command == "simulate-tail") status = cmd_simulate_tail(cfg, ctx);
  else if (cfg.command == "renewal-exact") status = cmd_renewal_exact(cfg, ctx);
  else if (cfg.command == "renewal-mc") status = cmd_renewal_mc(cfg, ctx);
  else if (cfg.command == "walk-ladder") status = cmd_walk_ladder(cfg, ctx);
  else if (cfg.command == "u-function") status = cmd_u_function(cfg, ctx);
  else if (cfg.command == "fit-exponent") status = cmd_fit_exponent(cfg, ctx);
  else if (cfg.command == "crosscheck") status = cmd_crosscheck(cfg, ctx);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest{{"command", cfg.command},
                {"config", json::parse(config_to_json_text(cfg))},
                {"build", {{"git_describe", kGitDescribe}}},
                {"wall_time_s", wall},
                {"exit_status", status},
                {"outputs", ctx.outputs}};
  if (cfg.master_seed) manifest["master_seed"] = *cfg.master_seed;
  std::ofstream out(ctx.dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  return status;
}

int run_with_error_json(const ExperimentConfig& cfg) {
  try {
    return run_command(cfg);
  } catch (const std::exception& e) {
    json err{{"error", "run_failed"}, {"detail", e.what()}};
    if (!cfg.preset.empty()) err["preset"] = cfg.preset;
    std::cerr << err.dump() << std::endl;
    return 2;
  }
}

}  // namespace bpire
