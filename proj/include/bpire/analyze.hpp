#pragma once
// Asymptotic diagnostics: log-log exponent fits with dyadic local slopes,
// ratio stabilization for the d_n-to-ladder limit, and the Tauberian
// stabilization of the d-series generating function.
//
// Slowly varying factors are never estimated; fits report the exponent plus
// a drift diagnostic that fires when the local slopes trend monotonically.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpire {

struct SeriesPoint {
  double n = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
};

struct LocalSlope {
  double n_lo = 0.0;
  double n_hi = 0.0;  // window [n_lo, n_hi)
  double slope = 0.0;
  double stderr_ = 0.0;
};

struct ExponentFit {
  double n_lo = 0.0;
  double n_hi = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  std::vector<LocalSlope> local_slopes;  // dyadic windows from n = 16
  bool drift_flag = false;
  std::vector<double> excluded_n;  // nonpositive values dropped from the fit
};

// Weighted least squares of log(value) on log(n) over [n_lo, n_hi].
// Requires n_lo >= 10 and at least 4 dyadic windows inside the range.
ExponentFit fit_exponent(std::span<const SeriesPoint> series, double n_lo,
                         double n_hi);

struct RatioPoint {
  double n = 0.0;
  double ratio = 0.0;
  double stderr_ = 0.0;
};

struct ThetaRatioResult {
  std::vector<RatioPoint> points;
  double mann_kendall_z = 0.0;  // over the top half of the grid
  double mann_kendall_p = 1.0;
  bool stabilized = false;      // no significant trend at 5%
  std::vector<double> dropped_n;
  bool degenerate_flag = false;  // ladder identically 1: non-oscillating walk
};

// Pointwise d_n / ladder_n with propagated errors; both series must share
// the n grid.
ThetaRatioResult theta_ratio(std::span<const SeriesPoint> d_series,
                             std::span<const SeriesPoint> ladder_series);

struct TauberianPoint {
  double s = 0.0;
  double scaled_value = 0.0;  // D_trunc(s) (1-s)^(1-rho)
};

struct TauberianResult {
  std::vector<TauberianPoint> points;
  double mann_kendall_z = 0.0;
  double mann_kendall_p = 1.0;
  bool stabilized = false;
};

struct TruncationError : std::runtime_error {
  TruncationError(const std::string& msg, std::uint64_t required)
      : std::runtime_error(msg), required_n(required) {}
  std::uint64_t required_n;
};

// d holds d_0..d_N. Refuses (TruncationError) when the truncated series at
// max(s_grid) would carry a scaled tail above 1e-6, estimating the required
// length from the monotone bound d_k <= d_N.
TauberianResult tauberian_check(std::span<const double> d, double rho,
                                std::span<const double> s_grid);

// Two-sided Mann-Kendall trend statistic.
double mann_kendall_z(std::span<const double> values);
double mann_kendall_p(std::span<const double> values);

}  // namespace bpire
