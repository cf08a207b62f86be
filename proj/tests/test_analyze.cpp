#include <doctest.h>

#include <cmath>
#include <vector>

#include "bpire/analyze.hpp"
#include "bpire/rng.hpp"

using namespace bpire;

namespace {

std::vector<SeriesPoint> power_law(double c, double exponent, double lo, double hi,
                                   int points, double rel_err = 0.0) {
  std::vector<SeriesPoint> out;
  for (int i = 0; i < points; ++i) {
    const double n = lo * std::pow(hi / lo, double(i) / (points - 1));
    SeriesPoint p;
    p.n = n;
    p.value = c * std::pow(n, exponent);
    p.stderr_ = rel_err * p.value;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("analyze");

TEST_CASE("fit_exponent recovers a pure power law to 1e-6, no drift") {
  auto series = power_law(3.7, -0.5, 10.0, 20000.0, 60);
  const ExponentFit fit = fit_exponent(series, 16.0, 20000.0);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK_FALSE(fit.drift_flag);
  CHECK(fit.local_slopes.size() >= 4);
  CHECK(fit.excluded_n.empty());
}

TEST_CASE("fit_exponent is invariant under multiplicative rescaling") {
  auto a = power_law(1.0, -0.73, 16.0, 40000.0, 80, 0.01);
  auto b = a;
  for (auto& p : b) {
    p.value *= 1000.0;
    p.stderr_ *= 1000.0;
  }
  const ExponentFit fa = fit_exponent(a, 16.0, 40000.0);
  const ExponentFit fb = fit_exponent(b, 16.0, 40000.0);
  CHECK(std::abs(fa.slope - fb.slope) < 1e-12);
  CHECK(std::abs(fa.slope_stderr - fb.slope_stderr) < 1e-12);
}

TEST_CASE("fit_exponent flags the drift of a log factor") {
  // c n^{-1/2} log n: local slope -1/2 + 1/log n, increasing toward -1/2
  std::vector<SeriesPoint> series;
  for (double n = 16.0; n <= 65536.0; n *= std::pow(2.0, 0.125)) {
    series.push_back({n, std::pow(n, -0.5) * std::log(n), 0.0});
  }
  const ExponentFit fit = fit_exponent(series, 16.0, 65536.0);
  CHECK(fit.drift_flag);
  for (std::size_t i = 1; i < fit.local_slopes.size(); ++i) {
    CHECK(fit.local_slopes[i].slope > fit.local_slopes[i - 1].slope);
    CHECK(fit.local_slopes[i].slope < -0.5 + 1.0);
  }
}

TEST_CASE("fit_exponent lists excluded nonpositive points") {
  auto series = power_law(1.0, -0.5, 10.0, 20000.0, 50);
  series[10].value = 0.0;
  series[11].value = -1.0;
  const ExponentFit fit = fit_exponent(series, 16.0, 20000.0);
  CHECK(fit.excluded_n.size() == 2);
}

TEST_CASE("fit_exponent input validation") {
  auto series = power_law(1.0, -0.5, 10.0, 1000.0, 30);
  CHECK_THROWS_AS(fit_exponent(series, 5.0, 1000.0), std::invalid_argument);
  // not enough dyadic windows
  CHECK_THROWS_AS(fit_exponent(series, 16.0, 40.0), std::invalid_argument);
}

TEST_CASE("mann-kendall: monotone trends detected, noise not") {
  std::vector<double> up{1.0, 1.1, 1.3, 1.32, 1.5, 1.7, 1.71, 1.9, 2.0, 2.2};
  CHECK(mann_kendall_p(up) < 0.01);
  CounterRng rng = make_stream(61, "mk-noise", 0);
  std::vector<double> noise;
  for (int i = 0; i < 40; ++i) noise.push_back(uniform01(rng));
  CHECK(mann_kendall_p(noise) > 0.05);
}

TEST_CASE("theta_ratio: constant multiple gives flat stabilized ratio") {
  std::vector<SeriesPoint> ladder, d;
  for (double n = 10.0; n <= 1000.0; n *= 1.3) {
    const double l = std::pow(n, -0.5);
    ladder.push_back({n, l, 0.001 * l});
    d.push_back({n, 2.0 * l, 0.002 * l});
  }
  const ThetaRatioResult res = theta_ratio(d, ladder);
  REQUIRE(res.points.size() == d.size());
  for (const auto& p : res.points) {
    CHECK(p.ratio == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK(res.stabilized);
  CHECK_FALSE(res.degenerate_flag);
  CHECK(res.dropped_n.empty());
}

TEST_CASE("theta_ratio: swapping series inverts the ratio") {
  std::vector<SeriesPoint> a, b;
  CounterRng rng = make_stream(62, "ratio-swap", 0);
  for (double n = 10.0; n <= 500.0; n *= 1.5) {
    const double va = 0.2 + uniform01(rng);
    const double vb = 0.1 + uniform01(rng);
    a.push_back({n, va, 0.01});
    b.push_back({n, vb, 0.01});
  }
  const auto ab = theta_ratio(a, b);
  const auto ba = theta_ratio(b, a);
  for (std::size_t i = 0; i < ab.points.size(); ++i) {
    CHECK(ab.points[i].ratio == doctest::Approx(1.0 / ba.points[i].ratio).epsilon(1e-12));
  }
}

TEST_CASE("theta_ratio: degenerate walk flagged, zero ladder points dropped") {
  std::vector<SeriesPoint> ladder, d;
  for (double n = 10.0; n <= 100.0; n += 10.0) {
    ladder.push_back({n, 1.0, 0.0});  // P(L~_n >= 0) = 1: X degenerate
    d.push_back({n, std::pow(0.9, n), 0.0});
  }
  const auto res = theta_ratio(d, ladder);
  CHECK(res.degenerate_flag);

  ladder[3].value = 0.0;
  const auto res2 = theta_ratio(d, ladder);
  CHECK(res2.dropped_n.size() == 1);
  CHECK(res2.dropped_n[0] == 40.0);
  CHECK(res2.points.size() == d.size() - 1);
}

TEST_CASE("tauberian: d_n = n^{-1/2} scales to Gamma(1/2) = sqrt(pi)") {
  // D(s) = 1 + Li_{1/2}(s); the d_0 = 1 term keeps the s = 0.999 deviation
  // from sqrt(pi) under two percent
  std::vector<double> d{1.0};
  for (int n = 1; n <= 20000; ++n) d.push_back(1.0 / std::sqrt(double(n)));
  const double s_grid[] = {0.99, 0.995, 0.999};
  const TauberianResult res = tauberian_check(d, 0.5, s_grid);
  const double root_pi = std::sqrt(std::acos(-1.0));
  CHECK(res.points.back().s == 0.999);
  CHECK(res.points.back().scaled_value == doctest::Approx(root_pi).epsilon(0.02));

  // independent oracle: Li_{1/2}(e^{-t}) = sqrt(pi/t) + sum zeta(1/2-k)(-t)^k/k!
  const double t = -std::log(0.999);
  const double zeta_half = -1.4603545088095868;
  const double zeta_mhalf = -0.2078862249773546;
  const double li = std::sqrt(std::acos(-1.0) / t) + zeta_half - zeta_mhalf * t;
  const double oracle = (1.0 + li) * std::pow(1.0 - 0.999, 0.5);
  CHECK(res.points.back().scaled_value == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("tauberian guards: rho range and truncation length") {
  std::vector<double> d(101, 1.0);
  const double s_grid[] = {0.9};
  CHECK_THROWS_AS(tauberian_check(d, 0.0, s_grid), std::domain_error);
  CHECK_THROWS_AS(tauberian_check(d, 1.0, s_grid), std::domain_error);
  // constant d with s too close to 1 for a 100-term series
  const double close[] = {0.999};
  try {
    tauberian_check(d, 0.5, close);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(e.required_n > 100);
  }
}

TEST_SUITE_END();
