#pragma once
// The associated random walk: path functionals, ladder probabilities, Spitzer
// positivity fractions, and the renewal function U with its harmonic
// identity.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bpire/envmodel.hpp"
#include "bpire/rng.hpp"

namespace bpire {

struct WalkPath {
  std::vector<double> increments;
  std::vector<double> prefix_sums;  // S_0 = 0 .. S_n
  double running_min = 0.0;         // L_n = min(S_0..S_n)
  double running_max_from_1 = 0.0;  // M_n = max(S_1..S_n); -inf for n = 0
  int argmin_first = 0;             // tau(n): smallest index attaining L_n
  bool reflected = false;

  // Exponential-sum accessors: A_n = e^{S_n}, B_{i,n} = sum_{k=i..n} e^{S_k}.
  double a_end() const;
  double exp_sum(int i, int n) const;
};

// Single pass; when reflected is set the increments are negated first.
WalkPath path_statistics(std::span<const double> increments,
                         bool reflected = false);

struct PointEstimate {
  std::uint64_t n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Monte Carlo P(S_n > 0) for each n in n_list, binomial errors.
std::vector<PointEstimate> spitzer_rho_empirical(const EnvironmentModel& model,
                                                 std::span<const std::uint64_t> n_list,
                                                 std::uint64_t replicas,
                                                 std::uint64_t seed,
                                                 unsigned workers);

// Monte Carlo P(L_n >= 0) (or P(L~_n >= 0) when reflected) for each n in
// n_list. Estimated from first-passage times below zero, so the curve is
// exactly nonincreasing on nested prefixes of the same paths.
std::vector<PointEstimate> ladder_probability(const EnvironmentModel& model,
                                              std::span<const std::uint64_t> n_list,
                                              std::uint64_t replicas,
                                              std::uint64_t seed,
                                              unsigned workers, bool reflected);

// rho = 1/2 for alpha = 1, else 1/2 + arctan(beta tan(pi alpha/2))/(pi alpha).
double rho_from_stable(const StableParams& params);

struct RenewalFunctionEstimate {
  std::vector<double> x_grid;
  std::vector<double> u_values;
  std::vector<double> std_errors;
  std::uint64_t n_truncation = 0;
  std::uint64_t replicas = 0;
  // Contribution of the last half-block of the truncated series; a proxy for
  // the discarded tail.
  double tail_estimate = 0.0;
  bool tail_flagged = false;

  // Piecewise-linear on the grid; 0 left of zero, clamped above the grid.
  double interpolate(double x) const;
};

// U(x) = I{x >= 0} + sum_n P(S_n >= -x, M_n < 0), truncated Monte Carlo.
// Only the strictly-negative-running-max prefix of each path contributes, so
// replicas terminate at their first nonnegative step.
RenewalFunctionEstimate estimate_U(const EnvironmentModel& model,
                                   std::vector<double> x_grid,
                                   std::uint64_t n_truncation,
                                   std::uint64_t replicas, std::uint64_t seed,
                                   unsigned workers,
                                   double tail_tolerance = 1e-2);

struct HarmonicCheckPoint {
  double x = 0.0;
  double lhs = 0.0;       // E[U(x + X); x + X >= 0]
  double u_at_x = 0.0;
  double discrepancy = 0.0;
  double combined_stderr = 0.0;
  bool pass = false;
  bool coverage_flagged = false;  // draws of x + X fell beyond the U grid
};

// Verifies E[U(x+X); X+x >= 0] = U(x) on each grid point, within 3 sigma.
std::vector<HarmonicCheckPoint> check_harmonic_identity(
    const EnvironmentModel& model, const RenewalFunctionEstimate& u_est,
    std::span<const double> x_grid, std::uint64_t replicas, std::uint64_t seed,
    unsigned workers);

}  // namespace bpire
