#include <doctest.h>

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "bpire/gfalg.hpp"

using namespace bpire;

namespace {

EnvRealization constant_env(double m, int n) {
  EnvRealization env{{}, {}, ImmigrationLaw::finite_support({1.0 / 3.0, 0.0, 2.0 / 3.0})};
  for (int i = 0; i < n; ++i) {
    env.offspring.emplace_back(m);
    env.immigration.push_back(env.initial);
  }
  return env;
}

// Exact-rational oracle for the N(n;s) recursion, finite realizations only.
// Independent of the double-precision path: plain top-down recursion over
// boost rationals.
using Rational = boost::rational<boost::multiprecision::cpp_int>;

Rational rational_pgf_geometric(const Rational& m, const Rational& s) {
  return Rational(1) / (Rational(1) + m * (Rational(1) - s));
}

struct RationalEnv {
  std::vector<Rational> means;
  std::vector<Rational> g;  // immigration pgf coefficients, shared across levels
  Rational g_at(const Rational& s) const {
    Rational acc(0);
    for (std::size_t i = g.size(); i-- > 0;) acc = acc * s + g[i];
    return acc;
  }
};

Rational rational_N(const RationalEnv& env, int n, const Rational& s) {
  if (n == 0) {
    const Rational g0 = env.g_at(Rational(0));
    return (env.g_at(s) - g0) / (Rational(1) - g0);
  }
  const Rational f0 = rational_pgf_geometric(env.means[n - 1], Rational(0));
  const Rational fs = rational_pgf_geometric(env.means[n - 1], s);
  const Rational g = env.g_at(s);
  return rational_N(env, n - 1, f0) * (Rational(1) - g) +
         rational_N(env, n - 1, fs) * g;
}

double to_double(const Rational& r) {
  return boost::multiprecision::cpp_rational(r.numerator(), r.denominator())
      .convert_to<double>();
}

}  // namespace

TEST_SUITE_BEGIN("gfalg");

TEST_CASE("compose_forward basics") {
  EnvRealization env = constant_env(1.0, 4);
  CHECK(compose_forward(env, 2, 2, 0.37) == 0.37);  // F_{n,n}(s) = s
  CHECK(compose_forward(env, 0, 1, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(compose_forward(env, 0, 2, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(compose_forward(env, 3, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compose_forward(env, 0, 9, 0.0), std::invalid_argument);
}

TEST_CASE("compose_backward: constant m=1 gives n/(n+1), closed form agrees") {
  EnvRealization env = constant_env(1.0, 50);
  for (int n : {1, 2, 3, 10, 50}) {
    CHECK(compose_backward(env, n, 0, 0.0) ==
          doctest::Approx(double(n) / (n + 1)).epsilon(1e-13));
  }
  CHECK(compose_backward(env, 17, 0, 1.0) == 1.0);
}

TEST_CASE("compose_backward: example2 single step m=63 attains F(0) = 1/64") {
  EnvRealization env{{OffspringLaw(63.0)},
                     {ImmigrationLaw::finite_support({0.0, 1.0})},
                     ImmigrationLaw::finite_support({0.0, 1.0})};
  CHECK(compose_backward(env, 1, 0, 0.0) == doctest::Approx(1.0 / 64.0).epsilon(1e-15));
}

TEST_CASE("fraclinear closure: fold of compositions equals chained evaluation") {
  CounterRng rng = make_stream(11, "gfalg-closure", 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + int(uniform01(rng) * 1000);
    std::vector<FracLinear> maps;
    maps.reserve(std::size_t(k));
    for (int i = 0; i < k; ++i) {
      // log-means in [-2, 2]: stays well-conditioned at depth 10^3
      maps.push_back(FracLinear::basic(std::exp(4.0 * uniform01(rng) - 2.0)));
    }
    // F_k o ... o F_1 via coefficient composition
    FracLinear fold = FracLinear::identity();
    for (const auto& f : maps) fold = fold.then(f);
    const double s = uniform01(rng);
    double gap = 1.0 - s;
    for (const auto& f : maps) gap = f.gap_map(gap);
    CHECK(fold(s) == doctest::Approx(1.0 - gap).epsilon(1e-12));
    CHECK(fold.gap_map(1.0 - s) == doctest::Approx(gap).epsilon(1e-12));
  }
}

TEST_CASE("product_C: constant m=1 gives 1/(n+1); empty product is 1") {
  EnvRealization env = constant_env(1.0, 64);
  CHECK(product_C(env, 0, 0.0) == 1.0);
  for (int n : {1, 2, 5, 64}) {
    CHECK(product_C(env, n, 0.0) == doctest::Approx(1.0 / (n + 1)).epsilon(1e-13));
  }
}

TEST_CASE("product_C: closed form matches literal product on random environments") {
  const EnvironmentModel model = preset_model("example2");
  CounterRng rng = make_stream(12, "gfalg-product", 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + int(uniform01(rng) * 10);
    EnvRealization env = sample_realization(model, n, rng);
    const double s = 0.9 * uniform01(rng);
    CHECK_NOTHROW(product_C(env, n, s));  // throws if the two routes disagree
  }
}

TEST_CASE("product_C equals 1/B_n through the walk accessors") {
  const EnvironmentModel model = preset_model("example2");
  CounterRng rng = make_stream(13, "gfalg-bn", 0);
  EnvRealization env = sample_realization(model, 12, rng);
  double b = 0.0;  // B_n = sum_{k=0..n} e^{S_k}
  double s_walk = 0.0;
  b += std::exp(s_walk);
  for (int k = 1; k <= 12; ++k) {
    s_walk += env.offspring[k - 1].log_mean();
    b += std::exp(s_walk);
  }
  CHECK(product_C(env, 12, 0.0) == doctest::Approx(1.0 / b).epsilon(1e-12));
}

TEST_CASE("conditional_pgf_N: base case is the conditioned-positive pgf") {
  EnvRealization env = constant_env(1.0, 1);
  // G = (2/3)s^2 + 1/3 conditioned positive: N(0;s) = s^2
  for (double s : {0.0, 0.25, 0.5, 0.99, 1.0}) {
    CHECK(conditional_pgf_N(env, 0, s) == doctest::Approx(s * s).epsilon(1e-15));
  }
}

TEST_CASE("conditional_pgf_N: pinned value N(1;1/2) = 25/72") {
  EnvRealization env = constant_env(1.0, 1);
  CHECK(conditional_pgf_N(env, 1, 0.5) ==
        doctest::Approx(25.0 / 72.0).epsilon(1e-15));
}

TEST_CASE("conditional_pgf_N: normalization and monotonicity") {
  const EnvironmentModel model = preset_model("example2");
  CounterRng rng = make_stream(14, "gfalg-n", 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + int(uniform01(rng) * 8);
    EnvRealization env = sample_realization(model, n, rng);
    CHECK(conditional_pgf_N(env, n, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = -1.0;
    for (int i = 0; i <= 20; ++i) {
      const double v = conditional_pgf_N(env, n, i / 20.0);
      CHECK(v >= prev - 1e-14);
      prev = v;
    }
  }
}

TEST_CASE("conditional_pgf_N: extinction chain N(n;0) = N(n-1;F_n(0)) exactly") {
  const EnvironmentModel model = preset_model("example2");
  CounterRng rng = make_stream(15, "gfalg-chain", 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + int(uniform01(rng) * 9);
    EnvRealization env = sample_realization(model, n, rng);
    const double lhs = conditional_pgf_N(env, n, 0.0);
    EnvRealization trimmed = env;
    trimmed.offspring.pop_back();
    trimmed.immigration.pop_back();
    const double rhs =
        conditional_pgf_N(trimmed, n - 1, env.offspring[std::size_t(n) - 1].pgf(0.0));
    CHECK(lhs == rhs);  // bit-exact
  }
}

TEST_CASE("conditional_pgf_N rejects a blocked initial law") {
  EnvRealization env = constant_env(1.0, 1);
  env.initial = ImmigrationLaw::finite_support({1.0});
  CHECK_THROWS_AS(conditional_pgf_N(env, 1, 0.5), std::domain_error);
}

TEST_CASE("rational oracle pins the double recursion") {
  // deterministic m=1 realization
  {
    RationalEnv renv;
    renv.g = {Rational(1, 3), Rational(0), Rational(2, 3)};
    for (int i = 0; i < 6; ++i) renv.means.push_back(Rational(1));
    EnvRealization env = constant_env(1.0, 6);
    for (int n = 0; n <= 6; ++n) {
      const double expect = to_double(rational_N(renv, n, Rational(0)));
      CHECK(conditional_pgf_N(env, n, 0.0) ==
            doctest::Approx(expect).epsilon(1e-13));
    }
    // R_2 = 1 - N(2;0) = 47/72 on this preset
    CHECK(to_double(Rational(1) - rational_N(renv, 2, Rational(0))) ==
          doctest::Approx(47.0 / 72.0).epsilon(1e-15));
  }
  // a fixed example2 realization: alternating means 63, 1/63
  {
    RationalEnv renv;
    renv.g = {Rational(1, 3), Rational(0), Rational(2, 3)};
    EnvRealization env{{}, {}, ImmigrationLaw::finite_support({1.0 / 3.0, 0.0, 2.0 / 3.0})};
    for (int i = 0; i < 8; ++i) {
      const bool up = i % 2 == 0;
      renv.means.push_back(up ? Rational(63) : Rational(1, 63));
      env.offspring.emplace_back(up ? 63.0 : 1.0 / 63.0);
      env.immigration.push_back(env.initial);
    }
    for (int n = 0; n <= 8; ++n) {
      const double expect = to_double(rational_N(renv, n, Rational(0)));
      CHECK(conditional_pgf_N(env, n, 0.0) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_SUITE_END();
