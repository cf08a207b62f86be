#pragma once
// Exact algebra of fractional-linear pgfs for a fixed environment
// realization: forward/backward compositions, the product C_n(s) with its
// exponential-sum closed form, and the conditional pgf N(n;s) of the stopped
// process.

#include <cstdint>
#include <span>
#include <vector>

#include "bpire/envmodel.hpp"
#include "bpire/laws.hpp"

namespace bpire {

// Moebius map s -> 1 - A(1-s)/(1 + B(1-s)). Closed under composition; equals
// a geometric pgf iteration when built from basic(m). This form has no pole
// on [0,1] and evaluates to exactly 1 at s = 1.
struct FracLinear {
  double a = 1.0;  // e^{S}
  double b = 0.0;  // running exponential sum

  static FracLinear identity() { return {1.0, 0.0}; }
  static FracLinear basic(double mean_m) { return {mean_m, mean_m}; }

  // Image of the survival gap g = 1 - s under 1 - F(1 - g). Long chains must
  // iterate the gap, not the pgf value: values indistinguishable from 1 in
  // double precision still carry an exact gap here.
  double gap_map(double g) const { return a * g / (1.0 + b * g); }

  double operator()(double s) const { return 1.0 - gap_map(1.0 - s); }

  // outer after *this.
  FracLinear then(const FracLinear& outer) const {
    return {a * outer.a, b + a * outer.b};
  }
};

// A realized environment: laws (F_1..F_n, G_1..G_n) plus the initial
// immigration law G_0.
struct EnvRealization {
  std::vector<OffspringLaw> offspring;
  std::vector<ImmigrationLaw> immigration;
  ImmigrationLaw initial;

  int length() const { return static_cast<int>(offspring.size()); }

  // Walk increments X_k = log m_k.
  std::vector<double> increments() const;
};

EnvRealization sample_realization(const EnvironmentModel& model, int n,
                                  CounterRng& rng);

// F_{i,n}(s) = F_{i+1}(F_{i+2}( ... F_n(s))), with F_{n,n}(s) = s.
double compose_forward(const EnvRealization& env, int i, int n, double s);

// F_{n,i}(s) = F_n(F_{n-1}( ... F_{i+1}(s))). For i = 0 the value is also
// computed through the exponential-sum closed form
//   F_{n,0}(s) = ((1-s)^{-1} + B_{1,n-1}) / ((1-s)^{-1} + B_{1,n});
// the two routes must agree to 1e-9 or an internal error is raised.
double compose_backward(const EnvRealization& env, int n, int i, double s);

// C_n(s) = prod_{i=1..n} F_{i,0}(s), returned through the closed form
// (1-s)^{-1} / ((1-s)^{-1} + B_{1,n}); the literal product is evaluated as a
// consistency check and must agree to 1e-12 relative. C_n(0) = 1/B_n.
double product_C(const EnvRealization& env, int n, double s);

// N(n;s) = E[s^{W_n} | environment], by the two-point recursion
//   N(n;s) = N(n-1;F_n(0))(1 - G_n(s)) + N(n-1;F_n(s)) G_n(s)
// with N(0;s) = (G_0(s) - G_0(0))/(1 - G_0(0)). Arguments are deduplicated
// positionally level by level, so the cost is O(n^2) instead of O(2^n), and
// the chain identity N(n;0) = N(n-1;F_n(0)) holds bit-exactly.
double conditional_pgf_N(const EnvRealization& env, int n, double s);

namespace detail {

// Shared engine behind conditional_pgf_N and the renewal enumeration: the
// same recursion with caller-supplied per-level immigration pgf and base law.
// g_eval(k, s) must return G_k(s) for k = 1..n; base(s) returns N(0;s).
template <class GEval, class Base>
double stopped_pgf_recursion(std::span<const OffspringLaw> f, int n, double s,
                             GEval&& g_eval, Base&& base) {
  if (n == 0) return base(s);
  // args[k] holds the level-k evaluation points; level k-1 prepends F_k(0)
  // and maps the rest through F_k.
  std::vector<std::vector<double>> args(static_cast<std::size_t>(n) + 1);
  args[n] = {s};
  for (int k = n; k >= 1; --k) {
    const auto& up = args[k];
    auto& down = args[k - 1];
    down.resize(up.size() + 1);
    down[0] = f[k - 1].pgf(0.0);
    for (std::size_t j = 0; j < up.size(); ++j) down[j + 1] = f[k - 1].pgf(up[j]);
  }
  std::vector<double> vals(args[0].size());
  for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = base(args[0][j]);
  std::vector<double> next;
  for (int k = 1; k <= n; ++k) {
    const auto& pts = args[k];
    next.resize(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double dead = vals[0];
      const double alive = vals[j + 1];
      if (dead == alive) {
        next[j] = dead;  // keeps N(n;0) = N(n-1;F_n(0)) exact
      } else {
        const double g = g_eval(k, pts[j]);
        next[j] = dead * (1.0 - g) + alive * g;
      }
    }
    vals.swap(next);
  }
  return vals[0];
}

}  // namespace detail

}  // namespace bpire
