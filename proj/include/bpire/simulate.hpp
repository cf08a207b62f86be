#pragma once
// Forward simulation of the three population processes and Monte Carlo
// estimation of the life-period tail P(zeta > n).
//
//   Y: immigration every generation.
//   Z: no immigration, Z_0 = 1.
//   W: immigration only while the offspring total stays positive; the first
//      generation with offspring total zero kills the process (zeta).

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bpire/envmodel.hpp"
#include "bpire/gfalg.hpp"
#include "bpire/rng.hpp"

namespace bpire {

// Population counts saturate here; a saturated replica cannot die within any
// realistic horizon and is counted as surviving, with its frequency reported.
inline constexpr std::uint64_t kPopulationSat =
    std::uint64_t(std::numeric_limits<std::int64_t>::max());

enum class ProcessKind { Y, Z, W };

enum class OffspringMethod { auto_select, direct_nb, gamma_poisson };

// Total offspring of w individuals: negative binomial with
// P(T=0) = (1+m)^{-w}, mean w m. Direct summation of geometrics for small w;
// the exact Gamma(w, m) -> Poisson mixture above, O(1) per step.
std::uint64_t step_offspring_total(std::uint64_t w, const OffspringLaw& law,
                                   CounterRng& rng,
                                   OffspringMethod method = OffspringMethod::auto_select);

struct SimulateOptions {
  bool log_environment = false;
  // Off-paper exploration hook; the default draws W_0 from G_0 conditioned
  // positive.
  std::optional<std::uint64_t> fixed_w0;
};

struct TrajectorySample {
  ProcessKind kind = ProcessKind::W;
  std::vector<std::uint64_t> sizes;  // sizes[0] = initial population
  std::optional<std::uint64_t> zeta; // W only: first n >= 1 with W_n = 0
  bool saturated = false;
  std::optional<EnvRealization> environment_log;
};

TrajectorySample simulate_W(const EnvironmentModel& model, std::uint64_t n_max,
                            CounterRng& rng, const SimulateOptions& opt = {});
TrajectorySample simulate_Y(const EnvironmentModel& model, std::uint64_t n_max,
                            CounterRng& rng, const SimulateOptions& opt = {});
TrajectorySample simulate_Z(const EnvironmentModel& model, std::uint64_t n_max,
                            CounterRng& rng);

// Lean twin of simulate_W: same draws, no trajectory storage.
// Returns zeta, or n_max + 1 when censored; sets the saturation flag.
std::uint64_t sample_zeta(const EnvironmentModel& model, std::uint64_t n_max,
                          CounterRng& rng, bool& saturated);

struct TailEstimate {
  std::vector<std::uint64_t> n_grid;
  std::vector<double> survival;   // P(zeta > n)
  std::vector<double> stderr_;    // binomial
  std::uint64_t replicas = 0;
  std::uint64_t master_seed = 0;
  double saturated_fraction = 0.0;
  bool saturation_warning = false;  // saturated fraction above 0.1%
};

// Replica-parallel survival curve of zeta, censored at max(n_grid).
TailEstimate estimate_tail(const EnvironmentModel& model,
                           std::vector<std::uint64_t> n_grid,
                           std::uint64_t replicas, std::uint64_t seed,
                           unsigned workers);

}  // namespace bpire
