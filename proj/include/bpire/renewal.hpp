#pragma once
// Renewal sequences of the stopped process and the renewal recursion
//
//   R_{n+1} = sum_{k=0}^{n-1} H_k R_{n-k} + H_n*,   R_1 = H_0*,
//
// with d_n = E[prod_{i=1..n} G_i(F_{i,n+1}(0))], H_n = d_n - d_{n+1}, and
// H_n* the initial-law variant. Two backends: exact enumeration over
// finite-support environments, and Monte Carlo over sampled environments.
//
// Immigration laws are independent of the offspring sequence and enter every
// product multilinearly, so they integrate out exactly: products use the
// mixture-averaged pgf and the survival kernel psi, and only offspring
// sequences are enumerated or sampled.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpire/envmodel.hpp"

namespace bpire {

enum class RenewalBackend { exact_enumeration, monte_carlo };

struct RenewalSeries {
  int n_max = 0;
  RenewalBackend backend = RenewalBackend::exact_enumeration;

  std::vector<double> d;       // d_0..d_{n_max}; d_0 = 1
  std::vector<double> h;       // H_0..H_{n_max-1}, exactly d_n - d_{n+1}
  std::vector<double> h_star;  // H*_0..H*_{n_max-1}
  std::vector<double> r;       // R_1..R_{n_max} from the recursion

  // Exact backend only: the forward-composition dual of d (the two agree by
  // i.i.d. reversal) and R_n enumerated directly as 1 - E[N(n;0)],
  // independent of the recursion. r_enumeration[0] = R_0 = 1.
  std::vector<double> d_dual;
  std::vector<double> r_enumeration;

  // Monte Carlo backend only.
  std::uint64_t replicas = 0;
  std::vector<double> d_stderr;
  std::vector<double> h_star_stderr;
  std::vector<double> d_isotonic;  // nonincreasing projection, reported not substituted
  double isotonic_distance = 0.0;
};

struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& msg, double cost)
      : std::runtime_error(msg), estimated_cost(cost) {}
  double estimated_cost;
};

// Exact expectations by weighted enumeration of offspring sequences.
// Refuses (BudgetError) when the enumeration cost estimate is excessive;
// with two atoms n_max <= 12 is comfortable.
RenewalSeries exact_series(const EnvironmentModel& model, int n_max);

// Monte Carlo backend: per sampled offspring sequence the inner products are
// evaluated exactly; d and H* are estimated from prefix compositions of one
// shared sequence per replica, H is differenced from d.
RenewalSeries mc_series(const EnvironmentModel& model, int n_max,
                        std::uint64_t replicas, std::uint64_t seed,
                        unsigned workers);

// R_1..R_{n_max} by direct O(n^2) convolution of the recursion.
std::vector<double> solve_recursion(std::span<const double> h,
                                    std::span<const double> h_star, int n_max);

// Coefficient-wise residual of R(s)(1 - sH(s)) = sH*(s) + sR_1 up to order K,
// computed through truncated polynomial products. Uses the enumerated R when
// the series carries one (independent of the recursion), else the external R
// if given, else the recursion output.
double check_series_identity(const RenewalSeries& series, int order_k,
                             std::span<const double> external_r = {});

struct ThetaEstimate {
  std::uint64_t n = 0;
  double theta = 0.0;
  double theta_stderr = 0.0;
  double ladder = 0.0;  // P(L~_n >= 0) from the same paths
  double ladder_stderr = 0.0;
};

// Theta(n;s) = E[prod_{j=1..n} G_j(F_{j,0}(s)); L~_n >= 0], one estimate per
// grid point from shared replicas.
std::vector<ThetaEstimate> theta_functional_grid(const EnvironmentModel& model,
                                                 std::span<const std::uint64_t> n_grid,
                                                 double s, std::uint64_t replicas,
                                                 std::uint64_t seed,
                                                 unsigned workers);

ThetaEstimate theta_functional(const EnvironmentModel& model, std::uint64_t n,
                               double s, std::uint64_t replicas,
                               std::uint64_t seed, unsigned workers);

}  // namespace bpire
