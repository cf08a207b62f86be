#include "bpire/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace bpire {

namespace {

constexpr std::uint64_t kDirectNbMax = 32;
// Above this Poisson mean the count is indistinguishable from saturation for
// the stopped process (it can never return to zero within any horizon).
constexpr double kPoissonMeanCap = 1e18;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a > kPopulationSat - b) ? kPopulationSat : a + b;
}

std::uint64_t sample_initial(const EnvironmentModel& model, CounterRng& rng,
                             const SimulateOptions& opt) {
  if (opt.fixed_w0) {
    if (*opt.fixed_w0 == 0) {
      throw std::invalid_argument("initial population must be positive");
    }
    return *opt.fixed_w0;
  }
  const ImmigrationLaw& g0 = model.sample_immigration(rng);
  return g0.sample_positive(rng);
}

}  // namespace

std::uint64_t step_offspring_total(std::uint64_t w, const OffspringLaw& law,
                                   CounterRng& rng, OffspringMethod method) {
  if (w == 0) {
    throw std::logic_error("step_offspring_total: w = 0 is the caller's absorption case");
  }
  if (w >= kPopulationSat) return kPopulationSat;

  if (method == OffspringMethod::auto_select) {
    method = w <= kDirectNbMax ? OffspringMethod::direct_nb
                               : OffspringMethod::gamma_poisson;
  }

  if (method == OffspringMethod::direct_nb) {
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < w; ++i) total = sat_add(total, law.sample(rng));
    return total;
  }

  std::gamma_distribution<double> gamma(double(w), law.mean());
  const double rate = gamma(rng);
  if (!(rate < kPoissonMeanCap)) return kPopulationSat;
  if (rate <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> poisson(rate);
  return std::min(poisson(rng), kPopulationSat);
}

namespace {

// One stopped-process step; shared by simulate_W and sample_zeta so both
// consume identical draws.
struct WStep {
  std::uint64_t next = 0;
  bool died = false;
};

WStep advance_w(const EnvironmentModel& model, std::uint64_t w, CounterRng& rng,
                EnvRealization* log) {
  EnvStep env = model.sample_environment_step(rng);
  if (log) {
    log->offspring.push_back(env.offspring);
    log->immigration.push_back(*env.immigration);
  }
  const std::uint64_t t = step_offspring_total(w, env.offspring, rng);
  if (t == 0) return {0, true};
  const std::uint64_t eta = env.immigration->sample(rng);
  return {sat_add(t, eta), false};
}

}  // namespace

TrajectorySample simulate_W(const EnvironmentModel& model, std::uint64_t n_max,
                            CounterRng& rng, const SimulateOptions& opt) {
  TrajectorySample out;
  out.kind = ProcessKind::W;
  // W_0 from the conditioned-positive initial law; logging must not change
  // the draw sequence, so G_0 is recorded from the same draw.
  std::uint64_t w;
  std::optional<ImmigrationLaw> g0;
  if (opt.fixed_w0) {
    w = sample_initial(model, rng, opt);
  } else {
    const ImmigrationLaw& g = model.sample_immigration(rng);
    g0 = g;
    w = g.sample_positive(rng);
  }
  if (opt.log_environment) {
    out.environment_log =
        EnvRealization{{}, {}, g0 ? *g0 : model.immigration_atoms()[0].law};
  }
  out.sizes.push_back(w);
  out.saturated = w >= kPopulationSat;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    WStep step = advance_w(model, w, rng,
                           out.environment_log ? &*out.environment_log : nullptr);
    out.sizes.push_back(step.next);
    if (step.died) {
      out.zeta = n;
      break;
    }
    w = step.next;
    out.saturated = out.saturated || w >= kPopulationSat;
  }
  return out;
}

std::uint64_t sample_zeta(const EnvironmentModel& model, std::uint64_t n_max,
                          CounterRng& rng, bool& saturated) {
  std::uint64_t w = sample_initial(model, rng, SimulateOptions{});
  saturated = w >= kPopulationSat;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    WStep step = advance_w(model, w, rng, nullptr);
    if (step.died) return n;
    w = step.next;
    saturated = saturated || w >= kPopulationSat;
  }
  return n_max + 1;
}

TrajectorySample simulate_Y(const EnvironmentModel& model, std::uint64_t n_max,
                            CounterRng& rng, const SimulateOptions& opt) {
  TrajectorySample out;
  out.kind = ProcessKind::Y;
  std::uint64_t y;
  std::optional<ImmigrationLaw> g0;
  if (opt.fixed_w0) {
    y = sample_initial(model, rng, opt);
  } else {
    const ImmigrationLaw& g = model.sample_immigration(rng);
    g0 = g;
    y = g.sample_positive(rng);
  }
  if (opt.log_environment) {
    out.environment_log =
        EnvRealization{{}, {}, g0 ? *g0 : model.immigration_atoms()[0].law};
  }
  out.sizes.push_back(y);
  out.saturated = y >= kPopulationSat;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    EnvStep env = model.sample_environment_step(rng);
    if (out.environment_log) {
      out.environment_log->offspring.push_back(env.offspring);
      out.environment_log->immigration.push_back(*env.immigration);
    }
    // births first, then immigrants; no individuals means no births
    const std::uint64_t t =
        y == 0 ? 0 : step_offspring_total(y, env.offspring, rng);
    const std::uint64_t eta = env.immigration->sample(rng);
    y = sat_add(t, eta);
    out.sizes.push_back(y);
    out.saturated = out.saturated || y >= kPopulationSat;
  }
  return out;
}

TrajectorySample simulate_Z(const EnvironmentModel& model, std::uint64_t n_max,
                            CounterRng& rng) {
  TrajectorySample out;
  out.kind = ProcessKind::Z;
  std::uint64_t z = 1;
  out.sizes.push_back(z);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (z == 0) {  // absorbed; no further draws
      out.sizes.push_back(0);
      continue;
    }
    const OffspringLaw f = model.sample_offspring(rng);
    z = step_offspring_total(z, f, rng);
    out.sizes.push_back(z);
    out.saturated = out.saturated || z >= kPopulationSat;
  }
  return out;
}

TailEstimate estimate_tail(const EnvironmentModel& model,
                           std::vector<std::uint64_t> n_grid,
                           std::uint64_t replicas, std::uint64_t seed,
                           unsigned workers) {
  if (n_grid.empty()) throw std::invalid_argument("estimate_tail: empty n_grid");
  if (replicas == 0) throw std::invalid_argument("estimate_tail: no replicas");
  if (!model.initial_law_ok()) {
    throw std::domain_error("estimate_tail: an immigration atom has G(0) = 1; "
                            "the initial law puts no mass on positive states");
  }
  const std::uint64_t n_max = *std::max_element(n_grid.begin(), n_grid.end());

  struct ZetaAcc {
    std::vector<std::uint64_t> died_at;  // index n: zeta == n, n <= n_max
    std::uint64_t censored = 0;
    std::uint64_t saturated = 0;
  };

  auto acc = parallel_reduce<ZetaAcc>(
      replicas, workers,
      ZetaAcc{std::vector<std::uint64_t>(n_max + 1, 0), 0, 0},
      [&](std::uint64_t lo, std::uint64_t hi) {
        ZetaAcc part{std::vector<std::uint64_t>(n_max + 1, 0), 0, 0};
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "simulate-tail", r);
          bool sat = false;
          const std::uint64_t z = sample_zeta(model, n_max, rng, sat);
          if (z <= n_max) {
            ++part.died_at[z];
          } else {
            ++part.censored;
          }
          if (sat) ++part.saturated;
        }
        return part;
      },
      [](ZetaAcc& total, const ZetaAcc& part) {
        for (std::size_t i = 0; i < total.died_at.size(); ++i) {
          total.died_at[i] += part.died_at[i];
        }
        total.censored += part.censored;
        total.saturated += part.saturated;
      });

  // survivors(n) = #{zeta > n} from the cumulative death counts
  std::vector<std::uint64_t> dead_by(n_max + 1, 0);
  std::uint64_t cum = 0;
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    cum += acc.died_at[n];
    dead_by[n] = cum;
  }

  TailEstimate est;
  est.n_grid = std::move(n_grid);
  est.replicas = replicas;
  est.master_seed = seed;
  est.survival.resize(est.n_grid.size());
  est.stderr_.resize(est.n_grid.size());
  for (std::size_t i = 0; i < est.n_grid.size(); ++i) {
    const std::uint64_t alive = replicas - dead_by[est.n_grid[i]];
    const double p = double(alive) / double(replicas);
    est.survival[i] = p;
    est.stderr_[i] = std::sqrt(p * (1.0 - p) / double(replicas));
  }
  est.saturated_fraction = double(acc.saturated) / double(replicas);
  est.saturation_warning = est.saturated_fraction > 1e-3;
  return est;
}

}  // namespace bpire
