#include "bpire/gfalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace bpire {

namespace {

double log_add_exp(double x, double y) {
  if (x < y) std::swap(x, y);
  return x + std::log1p(std::exp(y - x));
}

void check_indices(const EnvRealization& env, int i, int n) {
  if (i < 0 || n < i || n > env.length()) {
    throw std::invalid_argument("gfalg: index pair outside 0 <= i <= n <= env.n");
  }
}

// log B_{1,n} of the realized walk; -inf for n = 0.
double log_b1n(const EnvRealization& env, int n) {
  double s_k = 0.0;
  double lb = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k) {
    s_k += env.offspring[k - 1].log_mean();
    lb = (k == 1) ? s_k : log_add_exp(lb, s_k);
  }
  return lb;
}

}  // namespace

std::vector<double> EnvRealization::increments() const {
  std::vector<double> x;
  x.reserve(offspring.size());
  for (const auto& f : offspring) x.push_back(f.log_mean());
  return x;
}

EnvRealization sample_realization(const EnvironmentModel& model, int n,
                                  CounterRng& rng) {
  EnvRealization env{{}, {}, model.sample_immigration(rng)};
  env.offspring.reserve(n);
  env.immigration.reserve(n);
  for (int k = 0; k < n; ++k) {
    EnvStep step = model.sample_environment_step(rng);
    env.offspring.push_back(step.offspring);
    env.immigration.push_back(*step.immigration);
  }
  return env;
}

double compose_forward(const EnvRealization& env, int i, int n, double s) {
  check_indices(env, i, n);
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("compose_forward: s outside [0,1]");
  }
  double gap = 1.0 - s;
  for (int k = n; k > i; --k) {
    gap = FracLinear::basic(env.offspring[k - 1].mean()).gap_map(gap);
  }
  return 1.0 - gap;
}

double compose_backward(const EnvRealization& env, int n, int i, double s) {
  check_indices(env, i, n);
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("compose_backward: s outside [0,1]");
  }
  double gap = 1.0 - s;
  for (int k = i + 1; k <= n; ++k) {
    gap = FracLinear::basic(env.offspring[k - 1].mean()).gap_map(gap);
  }
  const double t = 1.0 - gap;
  if (i != 0 || n == 0 || s == 1.0) return t;

  // Closed form ((1-s)^{-1} + B_{1,n-1}) / ((1-s)^{-1} + B_{1,n}), evaluated
  // in log space so that long realizations cannot overflow.
  const double log_u = -std::log1p(-s);
  const double lb_prev = log_b1n(env, n - 1);
  const double lb = log_b1n(env, n);
  const double num = std::isinf(lb_prev) ? log_u : log_add_exp(log_u, lb_prev);
  const double closed = std::exp(num - log_add_exp(log_u, lb));
  if (std::abs(closed - t) > 1e-9 * std::max(1.0, std::abs(closed))) {
    throw std::runtime_error("compose_backward: closed form and iterated "
                             "evaluation disagree");
  }
  return closed;
}

double product_C(const EnvRealization& env, int n, double s) {
  check_indices(env, 0, n);
  if (!(s >= 0.0 && s < 1.0)) {
    throw std::invalid_argument("product_C: s outside [0,1)");
  }
  if (n == 0) return 1.0;

  // Literal product of the backward compositions; F_{i,0}(s) shares prefixes,
  // so one sweep over the iterated gap multiplies them all.
  double literal = 1.0;
  double gap = 1.0 - s;
  for (int i = 1; i <= n; ++i) {
    gap = FracLinear::basic(env.offspring[i - 1].mean()).gap_map(gap);
    literal *= 1.0 - gap;
  }

  const double log_u = -std::log1p(-s);
  const double closed = std::exp(log_u - log_add_exp(log_u, log_b1n(env, n)));
  if (std::abs(closed - literal) > 1e-12 * std::max(closed, literal)) {
    throw std::runtime_error("product_C: literal product and closed form "
                             "disagree beyond 1e-12");
  }
  return closed;
}

double conditional_pgf_N(const EnvRealization& env, int n, double s) {
  check_indices(env, 0, n);
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("conditional_pgf_N: s outside [0,1]");
  }
  const double g0_zero = env.initial.prob_zero();
  if (!(g0_zero < 1.0)) {
    throw std::domain_error("conditional_pgf_N: initial law has G_0(0) = 1");
  }
  if (n > 5000) {
    throw std::invalid_argument("conditional_pgf_N: n too large for the "
                                "O(n^2) recursion");
  }
  return detail::stopped_pgf_recursion(
      std::span<const OffspringLaw>(env.offspring.data(), env.offspring.size()),
      n, s,
      [&](int k, double arg) { return env.immigration[k - 1].pgf(arg); },
      [&](double arg) { return (env.initial.pgf(arg) - g0_zero) / (1.0 - g0_zero); });
}

}  // namespace bpire
