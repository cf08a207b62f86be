#include "bpire/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bpire {

double WalkPath::a_end() const { return std::exp(prefix_sums.back()); }

double WalkPath::exp_sum(int i, int n) const {
  if (i < 0 || n >= static_cast<int>(prefix_sums.size())) {
    throw std::invalid_argument("WalkPath::exp_sum: index range");
  }
  double acc = 0.0;
  for (int k = i; k <= n; ++k) acc += std::exp(prefix_sums[k]);
  return acc;
}

WalkPath path_statistics(std::span<const double> increments, bool reflected) {
  WalkPath p;
  p.reflected = reflected;
  const std::size_t n = increments.size();
  p.increments.reserve(n);
  p.prefix_sums.reserve(n + 1);
  p.prefix_sums.push_back(0.0);
  p.running_min = 0.0;
  p.argmin_first = 0;
  p.running_max_from_1 = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = reflected ? -increments[k] : increments[k];
    p.increments.push_back(x);
    s += x;
    p.prefix_sums.push_back(s);
    if (s < p.running_min) {  // strict: ties keep the smallest index
      p.running_min = s;
      p.argmin_first = static_cast<int>(k) + 1;
    }
    if (s > p.running_max_from_1) p.running_max_from_1 = s;
  }
  return p;
}

double rho_from_stable(const StableParams& params) { return params.rho(); }

namespace {

struct CountAcc {
  std::vector<std::uint64_t> counts;
};

std::vector<PointEstimate> binomial_estimates(
    std::span<const std::uint64_t> n_list, const std::vector<std::uint64_t>& counts,
    std::uint64_t replicas) {
  std::vector<PointEstimate> out(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double p = double(counts[i]) / double(replicas);
    out[i] = {n_list[i], p, std::sqrt(p * (1.0 - p) / double(replicas))};
  }
  return out;
}

}  // namespace

std::vector<PointEstimate> spitzer_rho_empirical(const EnvironmentModel& model,
                                                 std::span<const std::uint64_t> n_list,
                                                 std::uint64_t replicas,
                                                 std::uint64_t seed,
                                                 unsigned workers) {
  if (n_list.empty()) return {};
  const std::uint64_t n_max = *std::max_element(n_list.begin(), n_list.end());
  std::vector<std::uint64_t> sorted(n_list.begin(), n_list.end());
  std::sort(sorted.begin(), sorted.end());

  auto acc = parallel_reduce<CountAcc>(
      replicas, workers, CountAcc{std::vector<std::uint64_t>(n_list.size(), 0)},
      [&](std::uint64_t lo, std::uint64_t hi) {
        CountAcc part{std::vector<std::uint64_t>(sorted.size(), 0)};
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "walk-spitzer", r);
          double s = 0.0;
          std::size_t next = 0;
          for (std::uint64_t k = 1; k <= n_max && next < sorted.size(); ++k) {
            s += model.sample_increment(rng);
            while (next < sorted.size() && sorted[next] == k) {
              if (s > 0.0) ++part.counts[next];
              ++next;
            }
          }
        }
        return part;
      },
      [](CountAcc& total, const CountAcc& part) {
        for (std::size_t i = 0; i < total.counts.size(); ++i) {
          total.counts[i] += part.counts[i];
        }
      });

  // map sorted counts back to the caller's order
  std::vector<std::uint64_t> counts(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), n_list[i]);
    counts[i] = acc.counts[std::size_t(it - sorted.begin())];
  }
  return binomial_estimates(n_list, counts, replicas);
}

std::vector<PointEstimate> ladder_probability(const EnvironmentModel& model,
                                              std::span<const std::uint64_t> n_list,
                                              std::uint64_t replicas,
                                              std::uint64_t seed,
                                              unsigned workers, bool reflected) {
  if (n_list.empty()) return {};
  const std::uint64_t n_max = *std::max_element(n_list.begin(), n_list.end());

  auto acc = parallel_reduce<CountAcc>(
      replicas, workers, CountAcc{std::vector<std::uint64_t>(n_list.size(), 0)},
      [&](std::uint64_t lo, std::uint64_t hi) {
        CountAcc part{std::vector<std::uint64_t>(n_list.size(), 0)};
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "walk-ladder", r);
          // first k >= 1 with S_k < 0; L_n >= 0 iff that time exceeds n
          std::uint64_t first_neg = n_max + 1;
          double s = 0.0;
          for (std::uint64_t k = 1; k <= n_max; ++k) {
            const double x = model.sample_increment(rng);
            s += reflected ? -x : x;
            if (s < 0.0) {
              first_neg = k;
              break;
            }
          }
          for (std::size_t i = 0; i < n_list.size(); ++i) {
            if (first_neg > n_list[i]) ++part.counts[i];
          }
        }
        return part;
      },
      [](CountAcc& total, const CountAcc& part) {
        for (std::size_t i = 0; i < total.counts.size(); ++i) {
          total.counts[i] += part.counts[i];
        }
      });
  return binomial_estimates(n_list, acc.counts, replicas);
}

double RenewalFunctionEstimate::interpolate(double x) const {
  if (x < 0.0) return 0.0;
  if (x_grid.empty()) return 0.0;
  if (x <= x_grid.front()) return u_values.front();
  if (x >= x_grid.back()) return u_values.back();
  const auto it = std::upper_bound(x_grid.begin(), x_grid.end(), x);
  const std::size_t j = std::size_t(it - x_grid.begin());
  const double x0 = x_grid[j - 1], x1 = x_grid[j];
  const double w = (x - x0) / (x1 - x0);
  return u_values[j - 1] * (1.0 - w) + u_values[j] * w;
}

RenewalFunctionEstimate estimate_U(const EnvironmentModel& model,
                                   std::vector<double> x_grid,
                                   std::uint64_t n_truncation,
                                   std::uint64_t replicas, std::uint64_t seed,
                                   unsigned workers, double tail_tolerance) {
  if (x_grid.empty()) throw std::invalid_argument("estimate_U: empty grid");
  std::vector<double> grid = std::move(x_grid);
  if (!std::is_sorted(grid.begin(), grid.end())) {
    std::sort(grid.begin(), grid.end());
  }
  const std::size_t g = grid.size();

  struct UAcc {
    std::vector<std::uint64_t> sum;    // sum of per-replica counts
    std::vector<std::uint64_t> sum2;   // sum of squared counts
    std::vector<std::uint64_t> tail;   // counts from n in (N/2, N]
  };

  const std::uint64_t half = n_truncation / 2;

  auto acc = parallel_reduce<UAcc>(
      replicas, workers,
      UAcc{std::vector<std::uint64_t>(g, 0), std::vector<std::uint64_t>(g, 0),
           std::vector<std::uint64_t>(g, 0)},
      [&](std::uint64_t lo, std::uint64_t hi) {
        UAcc part{std::vector<std::uint64_t>(g, 0),
                  std::vector<std::uint64_t>(g, 0),
                  std::vector<std::uint64_t>(g, 0)};
        std::vector<std::uint64_t> local(g), local_tail(g);
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "walk-u", r);
          std::fill(local.begin(), local.end(), 0);
          std::fill(local_tail.begin(), local_tail.end(), 0);
          double s = 0.0;
          for (std::uint64_t k = 1; k <= n_truncation; ++k) {
            s += model.sample_increment(rng);
            if (s >= 0.0) break;  // M_k < 0 fails from here on
            // event S_k >= -x  <=>  x >= -s
            const auto it = std::lower_bound(grid.begin(), grid.end(), -s);
            for (std::size_t j = std::size_t(it - grid.begin()); j < g; ++j) {
              ++local[j];
              if (k > half) ++local_tail[j];
            }
          }
          for (std::size_t j = 0; j < g; ++j) {
            part.sum[j] += local[j];
            part.sum2[j] += local[j] * local[j];
            part.tail[j] += local_tail[j];
          }
        }
        return part;
      },
      [](UAcc& total, const UAcc& part) {
        for (std::size_t j = 0; j < total.sum.size(); ++j) {
          total.sum[j] += part.sum[j];
          total.sum2[j] += part.sum2[j];
          total.tail[j] += part.tail[j];
        }
      });

  RenewalFunctionEstimate est;
  est.x_grid = grid;
  est.n_truncation = n_truncation;
  est.replicas = replicas;
  est.u_values.resize(g);
  est.std_errors.resize(g);
  double max_tail = 0.0;
  for (std::size_t j = 0; j < g; ++j) {
    const double r = double(replicas);
    const double mean = double(acc.sum[j]) / r;
    const double var = std::max(0.0, double(acc.sum2[j]) / r - mean * mean);
    const double indicator = grid[j] >= 0.0 ? 1.0 : 0.0;
    est.u_values[j] = indicator + mean;
    est.std_errors[j] = std::sqrt(var / r);
    max_tail = std::max(max_tail, double(acc.tail[j]) / r);
  }
  est.tail_estimate = max_tail;
  est.tail_flagged = max_tail > tail_tolerance;
  return est;
}

std::vector<HarmonicCheckPoint> check_harmonic_identity(
    const EnvironmentModel& model, const RenewalFunctionEstimate& u_est,
    std::span<const double> x_grid, std::uint64_t replicas, std::uint64_t seed,
    unsigned workers) {
  struct HAcc {
    std::vector<double> sum, sum2;
    std::vector<std::uint64_t> beyond;
  };
  const std::size_t g = x_grid.size();
  const double grid_max = u_est.x_grid.empty() ? 0.0 : u_est.x_grid.back();

  auto acc = parallel_reduce<HAcc>(
      replicas, workers,
      HAcc{std::vector<double>(g, 0.0), std::vector<double>(g, 0.0),
           std::vector<std::uint64_t>(g, 0)},
      [&](std::uint64_t lo, std::uint64_t hi) {
        HAcc part{std::vector<double>(g, 0.0), std::vector<double>(g, 0.0),
                  std::vector<std::uint64_t>(g, 0)};
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "walk-harmonic", r);
          const double x = model.sample_increment(rng);
          for (std::size_t j = 0; j < g; ++j) {
            const double y = x_grid[j] + x;
            double v = 0.0;
            if (x_grid[j] >= 0.0 && y >= 0.0) {
              v = u_est.interpolate(y);
              if (y > grid_max) ++part.beyond[j];
            }
            part.sum[j] += v;
            part.sum2[j] += v * v;
          }
        }
        return part;
      },
      [](HAcc& total, const HAcc& part) {
        for (std::size_t j = 0; j < total.sum.size(); ++j) {
          total.sum[j] += part.sum[j];
          total.sum2[j] += part.sum2[j];
          total.beyond[j] += part.beyond[j];
        }
      });

  std::vector<HarmonicCheckPoint> out(g);
  for (std::size_t j = 0; j < g; ++j) {
    HarmonicCheckPoint& p = out[j];
    p.x = x_grid[j];
    const double r = double(replicas);
    const double mean = acc.sum[j] / r;
    const double var = std::max(0.0, acc.sum2[j] / r - mean * mean);
    const double se_lhs = std::sqrt(var / r);
    p.lhs = mean;
    p.u_at_x = p.x >= 0.0 ? u_est.interpolate(p.x) : 0.0;
    double se_u = 0.0;
    if (p.x >= 0.0) {
      const auto it = std::lower_bound(u_est.x_grid.begin(), u_est.x_grid.end(), p.x);
      if (it != u_est.x_grid.end()) {
        se_u = u_est.std_errors[std::size_t(it - u_est.x_grid.begin())];
      }
    }
    p.discrepancy = p.lhs - p.u_at_x;
    p.combined_stderr = std::sqrt(se_lhs * se_lhs + se_u * se_u);
    p.coverage_flagged = acc.beyond[j] > 0;
    p.pass = std::abs(p.discrepancy) <= 3.0 * p.combined_stderr ||
             (p.x < 0.0 && p.lhs == 0.0 && p.u_at_x == 0.0);
    out[j] = p;
  }
  return out;
}

}  // namespace bpire
