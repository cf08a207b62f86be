#include "bpire/renewal.hpp"

#include <algorithm>
#include <cmath>

#include "bpire/gfalg.hpp"
#include "bpire/rng.hpp"

namespace bpire {

namespace {

void require_finite_support(const EnvironmentModel& model, const char* who) {
  if (!model.offspring_finite()) {
    throw std::invalid_argument(std::string(who) +
                                ": needs a finite-support offspring component");
  }
}

void require_initial_ok(const EnvironmentModel& model, const char* who) {
  if (!model.initial_law_ok()) {
    throw std::domain_error(std::string(who) +
                            ": an immigration atom has G(0) = 1");
  }
}

// Offspring atoms in a fixed lexicographic order for the enumeration.
struct Atoms {
  std::vector<double> weight;
  std::vector<OffspringLaw> law;
  std::size_t size() const { return weight.size(); }
};

Atoms atom_table(const EnvironmentModel& model) {
  Atoms a;
  for (const auto& atom : model.offspring_atoms()) {
    a.weight.push_back(atom.weight);
    a.law.push_back(atom.law);
  }
  return a;
}

// Enumerates sequences (F_1..F_len) depth-first in lexicographic order,
// calling visit(weight) at each leaf with prefix state maintained by the
// caller through push/pop callbacks.
template <class Push, class Pop, class Visit>
void enumerate_sequences(const Atoms& atoms, int len, Push&& push, Pop&& pop,
                         Visit&& visit, double weight = 1.0, int depth = 0) {
  if (depth == len) {
    visit(weight);
    return;
  }
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    push(depth, atoms.law[a]);
    enumerate_sequences(atoms, len, push, pop, visit, weight * atoms.weight[a],
                        depth + 1);
    pop(depth);
  }
}

double pow_cost(std::size_t base, int exp) {
  double c = 1.0;
  for (int i = 0; i < exp; ++i) c *= double(base);
  return c;
}

}  // namespace

RenewalSeries exact_series(const EnvironmentModel& model, int n_max) {
  require_finite_support(model, "exact_series");
  require_initial_ok(model, "exact_series");
  if (n_max < 1) throw std::invalid_argument("exact_series: n_max >= 1");

  const Atoms atoms = atom_table(model);
  // leaves of all DFS trees: ~3 sums of k^(n+1) sequences plus the O(n^2)
  // recursion at each R_n leaf
  double cost = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    cost += 2.0 * pow_cost(atoms.size(), n + 1);
    cost += pow_cost(atoms.size(), n) * (1.0 + double(n) * double(n));
  }
  if (cost > 2e8) {
    throw BudgetError("exact_series: enumeration cost estimate " +
                          std::to_string(cost) + " exceeds the 2e8 budget; "
                          "reduce n_max",
                      cost);
  }

  auto gbar = [&](double s) { return model.mean_pgf(s); };
  auto psi = [&](double s) { return model.psi(s); };

  RenewalSeries out;
  out.n_max = n_max;
  out.backend = RenewalBackend::exact_enumeration;
  out.d.assign(std::size_t(n_max) + 1, 0.0);
  out.d_dual.assign(std::size_t(n_max) + 1, 0.0);
  out.h_star.assign(std::size_t(n_max), 0.0);
  out.r_enumeration.assign(std::size_t(n_max) + 1, 0.0);
  out.d[0] = 1.0;
  out.d_dual[0] = 1.0;
  out.r_enumeration[0] = 1.0;  // zeta >= 1 always

  // d_n (backward form): prefix compositions u_i = F_i(u_{i-1}), u_0 = 0,
  // product of Gbar(u_i).
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> u(std::size_t(n) + 1, 0.0);
    std::vector<double> prod(std::size_t(n) + 1, 1.0);
    KahanSum sum;
    enumerate_sequences(
        atoms, n,
        [&](int depth, const OffspringLaw& f) {
          u[depth + 1] = f.pgf(u[depth]);
          prod[depth + 1] = prod[depth] * gbar(u[depth + 1]);
        },
        [](int) {},
        [&](double w) { sum.add(w * prod[n]); });
    out.d[n] = sum.value();
  }

  // d_n (forward form) and H*_n from one depth-(n+1) enumeration of the
  // reversed positions: assigning position n+1 first keeps the suffix
  // composition t_j = F_j(t_{j+1}) prefix-computable.
  for (int n = 0; n <= n_max; ++n) {
    std::vector<double> t(std::size_t(n) + 2, 0.0);  // t[depth]: suffix comp
    std::vector<double> prod(std::size_t(n) + 2, 1.0);
    KahanSum sum_d, sum_hs;
    enumerate_sequences(
        atoms, n + 1,
        [&](int depth, const OffspringLaw& f) {
          // depth 0 assigns position n+1, depth j assigns position n+1-j
          t[depth + 1] = f.pgf(t[depth]);
          const int position = n + 1 - depth;
          prod[depth + 1] =
              position >= 2 ? prod[depth] * gbar(t[depth + 1]) : prod[depth];
        },
        [](int) {},
        [&](double w) {
          // after full assignment t[n+1] = F_{0,n+1}(0)
          sum_hs.add(w * psi(t[n + 1]) * prod[n + 1]);
          sum_d.add(w * prod[n]);
        });
    if (n >= 1) out.d_dual[n] = sum_d.value();
    if (n < n_max) out.h_star[n] = sum_hs.value();
  }

  // R_n = 1 - E[N(n;0)] enumerated directly, immigration integrated out.
  for (int n = 1; n <= n_max; ++n) {
    std::vector<OffspringLaw> seq(std::size_t(n), atoms.law[0]);
    KahanSum sum;
    enumerate_sequences(
        atoms, n,
        [&](int depth, const OffspringLaw& f) { seq[std::size_t(depth)] = f; },
        [](int) {},
        [&](double w) {
          const double nn = detail::stopped_pgf_recursion(
              std::span<const OffspringLaw>(seq.data(), seq.size()), n, 0.0,
              [&](int, double arg) { return gbar(arg); },
              [&](double arg) { return 1.0 - psi(arg); });
          sum.add(w * nn);
        });
    out.r_enumeration[n] = 1.0 - sum.value();
  }

  out.h.resize(std::size_t(n_max));
  for (int n = 0; n < n_max; ++n) out.h[n] = out.d[n] - out.d[n + 1];
  out.r = solve_recursion(out.h, out.h_star, n_max);
  return out;
}

RenewalSeries mc_series(const EnvironmentModel& model, int n_max,
                        std::uint64_t replicas, std::uint64_t seed,
                        unsigned workers) {
  require_initial_ok(model, "mc_series");
  if (n_max < 1) throw std::invalid_argument("mc_series: n_max >= 1");
  if (replicas == 0) throw std::invalid_argument("mc_series: no replicas");

  const std::size_t len = std::size_t(n_max) + 1;
  struct Acc {
    std::vector<double> d_sum, d_sum2, hs_sum, hs_sum2;
  };

  // Per replica: one offspring sequence F_1..F_{n_max+1}; prefix compositions
  // u_i and running products P_n = prod_{i<=n} Gbar(u_i) give, for every n,
  //   d-sample     = P_n
  //   H*-sample    = psi(u_{n+1}) P_n
  // (the H* form is the i.i.d. reversal of the forward definition, unbiased
  // point by point; the exact backend verifies the reversal identity).
  auto acc = parallel_reduce<Acc>(
      replicas, workers,
      Acc{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0),
          std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)},
      [&](std::uint64_t lo, std::uint64_t hi) {
        Acc part{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0),
                 std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "renewal-mc", r);
          double u = 0.0;
          double prod = 1.0;
          for (int n = 0; n <= n_max; ++n) {
            // prod currently equals P_n; u becomes u_{n+1}
            part.d_sum[std::size_t(n)] += prod;
            part.d_sum2[std::size_t(n)] += prod * prod;
            const OffspringLaw f = model.sample_offspring(rng);
            u = f.pgf(u);
            if (n < n_max) {
              const double hs = model.psi(u) * prod;
              part.hs_sum[std::size_t(n)] += hs;
              part.hs_sum2[std::size_t(n)] += hs * hs;
            }
            prod *= model.mean_pgf(u);
          }
        }
        return part;
      },
      [](Acc& total, const Acc& part) {
        for (std::size_t i = 0; i < total.d_sum.size(); ++i) {
          total.d_sum[i] += part.d_sum[i];
          total.d_sum2[i] += part.d_sum2[i];
          total.hs_sum[i] += part.hs_sum[i];
          total.hs_sum2[i] += part.hs_sum2[i];
        }
      });

  RenewalSeries out;
  out.n_max = n_max;
  out.backend = RenewalBackend::monte_carlo;
  out.replicas = replicas;
  out.d.resize(len);
  out.d_stderr.resize(len);
  out.h_star.resize(std::size_t(n_max));
  out.h_star_stderr.resize(std::size_t(n_max));
  const double r = double(replicas);
  for (std::size_t i = 0; i < len; ++i) {
    const double mean = acc.d_sum[i] / r;
    const double var = std::max(0.0, acc.d_sum2[i] / r - mean * mean);
    out.d[i] = mean;
    out.d_stderr[i] = std::sqrt(var / r);
    if (i < std::size_t(n_max)) {
      const double hs = acc.hs_sum[i] / r;
      const double hvar = std::max(0.0, acc.hs_sum2[i] / r - hs * hs);
      out.h_star[i] = hs;
      out.h_star_stderr[i] = std::sqrt(hvar / r);
    }
  }

  out.h.resize(std::size_t(n_max));
  for (int n = 0; n < n_max; ++n) out.h[n] = out.d[n] - out.d[n + 1];

  // Nonincreasing projection of d-hat (pool adjacent violators), reported
  // alongside the raw estimate.
  out.d_isotonic = out.d;
  {
    auto& v = out.d_isotonic;
    std::vector<double> level;
    std::vector<std::size_t> count;
    for (double x : v) {
      level.push_back(x);
      count.push_back(1);
      while (level.size() > 1 && level[level.size() - 2] < level.back()) {
        const double merged = (level[level.size() - 2] * double(count[count.size() - 2]) +
                               level.back() * double(count.back())) /
                              double(count[count.size() - 2] + count.back());
        count[count.size() - 2] += count.back();
        level[level.size() - 2] = merged;
        level.pop_back();
        count.pop_back();
      }
    }
    std::size_t pos = 0;
    for (std::size_t b = 0; b < level.size(); ++b) {
      for (std::size_t k = 0; k < count[b]; ++k) v[pos++] = level[b];
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      dist += (v[i] - out.d[i]) * (v[i] - out.d[i]);
    }
    out.isotonic_distance = std::sqrt(dist);
  }

  out.r = solve_recursion(out.h, out.h_star, n_max);
  return out;
}

std::vector<double> solve_recursion(std::span<const double> h,
                                    std::span<const double> h_star, int n_max) {
  if (static_cast<int>(h_star.size()) < n_max ||
      static_cast<int>(h.size()) + 1 < n_max) {
    throw std::invalid_argument("solve_recursion: series shorter than n_max");
  }
  std::vector<double> r(std::size_t(n_max) + 1, 0.0);  // r[n] = R_n, r[0] unused
  for (int n = 0; n < n_max; ++n) {
    KahanSum conv;
    for (int k = 0; k <= n - 1; ++k) conv.add(h[k] * r[std::size_t(n - k)]);
    r[std::size_t(n) + 1] = conv.value() + h_star[std::size_t(n)];
  }
  return std::vector<double>(r.begin() + 1, r.end());
}

double check_series_identity(const RenewalSeries& series, int order_k,
                             std::span<const double> external_r) {
  if (order_k < 1) throw std::invalid_argument("check_series_identity: K >= 1");
  // R coefficients R_1..R_K
  std::vector<double> r(std::size_t(order_k) + 1, 0.0);
  if (!external_r.empty()) {
    if (static_cast<int>(external_r.size()) < order_k) {
      throw std::invalid_argument("check_series_identity: external R too short");
    }
    for (int j = 1; j <= order_k; ++j) r[j] = external_r[std::size_t(j) - 1];
  } else if (!series.r_enumeration.empty()) {
    if (series.n_max < order_k) {
      throw std::invalid_argument("check_series_identity: series shorter than K");
    }
    for (int j = 1; j <= order_k; ++j) r[j] = series.r_enumeration[std::size_t(j)];
  } else {
    if (series.n_max < order_k) {
      throw std::invalid_argument("check_series_identity: series shorter than K");
    }
    for (int j = 1; j <= order_k; ++j) r[j] = series.r[std::size_t(j) - 1];
  }

  // lhs = R(s) - sH(s)R(s), truncated convolution; rhs = sH*(s) + sR_1
  double max_residual = 0.0;
  for (int j = 1; j <= order_k; ++j) {
    KahanSum conv;  // [s^j] of sH(s)R(s) = sum_{k+i=j-1} H_k R_i
    for (int k = 0; k <= j - 2; ++k) {
      conv.add(series.h[std::size_t(k)] * r[std::size_t(j - 1 - k)]);
    }
    const double lhs = r[std::size_t(j)] - conv.value();
    const double rhs =
        j == 1 ? r[1] : series.h_star[std::size_t(j) - 1];
    max_residual = std::max(max_residual, std::abs(lhs - rhs));
  }
  return max_residual;
}

std::vector<ThetaEstimate> theta_functional_grid(const EnvironmentModel& model,
                                                 std::span<const std::uint64_t> n_grid,
                                                 double s, std::uint64_t replicas,
                                                 std::uint64_t seed,
                                                 unsigned workers) {
  if (!(s >= 0.0 && s < 1.0)) {
    throw std::invalid_argument("theta_functional: s outside [0,1)");
  }
  if (n_grid.empty()) return {};
  const std::uint64_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
  std::vector<std::uint64_t> sorted(n_grid.begin(), n_grid.end());
  std::sort(sorted.begin(), sorted.end());

  struct Acc {
    std::vector<double> th_sum, th_sum2;
    std::vector<std::uint64_t> alive;
  };
  const std::size_t g = sorted.size();

  auto acc = parallel_reduce<Acc>(
      replicas, workers,
      Acc{std::vector<double>(g, 0.0), std::vector<double>(g, 0.0),
          std::vector<std::uint64_t>(g, 0)},
      [&](std::uint64_t lo, std::uint64_t hi) {
        Acc part{std::vector<double>(g, 0.0), std::vector<double>(g, 0.0),
                 std::vector<std::uint64_t>(g, 0)};
        for (std::uint64_t r = lo; r < hi; ++r) {
          CounterRng rng = make_stream(seed, "renewal-theta", r);
          // L~_n >= 0 means S_j <= 0 for all j <= n; paths stop contributing
          // once the walk goes positive.
          double u = s;
          double prod = 1.0;
          double walk = 0.0;
          std::size_t next = 0;
          while (next < g && sorted[next] == 0) {
            part.th_sum[next] += 1.0;
            part.th_sum2[next] += 1.0;
            ++part.alive[next];
            ++next;
          }
          for (std::uint64_t k = 1; k <= n_max && next < g; ++k) {
            const OffspringLaw f = model.sample_offspring(rng);
            walk += f.log_mean();
            if (walk > 0.0) break;
            u = f.pgf(u);
            prod *= model.mean_pgf(u);
            while (next < g && sorted[next] == k) {
              part.th_sum[next] += prod;
              part.th_sum2[next] += prod * prod;
              ++part.alive[next];
              ++next;
            }
          }
        }
        return part;
      },
      [](Acc& total, const Acc& part) {
        for (std::size_t i = 0; i < total.th_sum.size(); ++i) {
          total.th_sum[i] += part.th_sum[i];
          total.th_sum2[i] += part.th_sum2[i];
          total.alive[i] += part.alive[i];
        }
      });

  std::vector<ThetaEstimate> out(n_grid.size());
  const double r = double(replicas);
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), n_grid[i]);
    const std::size_t j = std::size_t(it - sorted.begin());
    ThetaEstimate e;
    e.n = n_grid[i];
    const double mean = acc.th_sum[j] / r;
    const double var = std::max(0.0, acc.th_sum2[j] / r - mean * mean);
    e.theta = mean;
    e.theta_stderr = std::sqrt(var / r);
    const double p = double(acc.alive[j]) / r;
    e.ladder = p;
    e.ladder_stderr = std::sqrt(p * (1.0 - p) / r);
    out[i] = e;
  }
  return out;
}

ThetaEstimate theta_functional(const EnvironmentModel& model, std::uint64_t n,
                               double s, std::uint64_t replicas,
                               std::uint64_t seed, unsigned workers) {
  const std::uint64_t grid[1] = {n};
  return theta_functional_grid(model, grid, s, replicas, seed, workers)[0];
}

}  // namespace bpire
