#include "bpire/analyze.hpp"

#include <algorithm>
#include <cmath>

#include "bpire/rng.hpp"

namespace bpire {

namespace {

struct WlsFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
};

// WLS of y on x with weights 1/sigma^2. When any sigma is zero the fit falls
// back to ordinary least squares with residual-based errors (exact series).
WlsFit wls(const std::vector<double>& x, const std::vector<double>& y,
           const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  const bool weighted =
      std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 0.0; });
  std::vector<double> w(n, 1.0);
  if (weighted) {
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (sigma[i] * sigma[i]);
  }
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  WlsFit f;
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * xbar;
  if (weighted) {
    f.slope_se = std::sqrt(1.0 / sxx);
  } else if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_se = std::sqrt(rss / double(n - 2) / sxx);
  }
  return f;
}

}  // namespace

ExponentFit fit_exponent(std::span<const SeriesPoint> series, double n_lo,
                         double n_hi) {
  if (!(n_lo >= 10.0)) {
    throw std::invalid_argument("fit_exponent: n_lo must be >= 10");
  }
  if (!(n_hi > n_lo)) throw std::invalid_argument("fit_exponent: empty range");

  ExponentFit fit;
  fit.n_lo = n_lo;
  fit.n_hi = n_hi;

  std::vector<double> x, y, sig, ns;
  for (const auto& p : series) {
    if (p.n < n_lo || p.n > n_hi) continue;
    if (!(p.value > 0.0)) {
      fit.excluded_n.push_back(p.n);
      continue;
    }
    x.push_back(std::log(p.n));
    y.push_back(std::log(p.value));
    sig.push_back(p.stderr_ > 0.0 ? p.stderr_ / p.value : 0.0);  // delta method
    ns.push_back(p.n);
  }
  if (x.size() < 2) throw std::invalid_argument("fit_exponent: fewer than 2 usable points");

  const WlsFit global = wls(x, y, sig);
  fit.slope = global.slope;
  fit.slope_stderr = global.slope_se;
  fit.intercept = global.intercept;

  // Dyadic windows [2^k, 2^{k+1}) from n = 16.
  for (double lo = 16.0; lo < n_hi; lo *= 2.0) {
    const double hi = lo * 2.0;
    if (hi <= n_lo) continue;
    std::vector<double> wx, wy, wsig;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (ns[i] >= lo && ns[i] < hi) {
        wx.push_back(x[i]);
        wy.push_back(y[i]);
        wsig.push_back(sig[i]);
      }
    }
    if (wx.size() < 2) continue;
    const WlsFit local = wls(wx, wy, wsig);
    fit.local_slopes.push_back({lo, hi, local.slope, local.slope_se});
  }
  if (fit.local_slopes.size() < 4) {
    throw std::invalid_argument(
        "fit_exponent: need at least 4 populated dyadic windows in range");
  }

  // Drift: strictly monotone local slopes whose total change is large against
  // the endpoint errors; the signature of a slowly varying factor.
  bool increasing = true, decreasing = true;
  for (std::size_t i = 1; i < fit.local_slopes.size(); ++i) {
    const double prev = fit.local_slopes[i - 1].slope;
    const double cur = fit.local_slopes[i].slope;
    increasing = increasing && cur > prev;
    decreasing = decreasing && cur < prev;
  }
  const auto& first = fit.local_slopes.front();
  const auto& last = fit.local_slopes.back();
  const double change = std::abs(last.slope - first.slope);
  const double noise = 2.0 * std::sqrt(first.stderr_ * first.stderr_ +
                                       last.stderr_ * last.stderr_);
  fit.drift_flag = (increasing || decreasing) && change > std::max(1e-6, noise);
  return fit;
}

double mann_kendall_z(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  long long s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = values[j] - values[i];
      s += diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
    }
  }
  const double var = double(n) * double(n - 1) * double(2 * n + 5) / 18.0;
  if (s > 0) return (double(s) - 1.0) / std::sqrt(var);
  if (s < 0) return (double(s) + 1.0) / std::sqrt(var);
  return 0.0;
}

double mann_kendall_p(std::span<const double> values) {
  const double z = std::abs(mann_kendall_z(values));
  return std::erfc(z / std::sqrt(2.0));  // two-sided
}

ThetaRatioResult theta_ratio(std::span<const SeriesPoint> d_series,
                             std::span<const SeriesPoint> ladder_series) {
  if (d_series.size() != ladder_series.size()) {
    throw std::invalid_argument("theta_ratio: series must share the n grid");
  }
  ThetaRatioResult out;
  bool all_ladder_one = true;
  for (std::size_t i = 0; i < d_series.size(); ++i) {
    if (d_series[i].n != ladder_series[i].n) {
      throw std::invalid_argument("theta_ratio: series must share the n grid");
    }
    const auto& dn = d_series[i];
    const auto& ln = ladder_series[i];
    all_ladder_one = all_ladder_one && ln.value >= 1.0 - 1e-12;
    if (!(ln.value > 0.0)) {
      out.dropped_n.push_back(ln.n);
      continue;
    }
    RatioPoint p;
    p.n = dn.n;
    p.ratio = dn.value / ln.value;
    const double rel_d = dn.value > 0.0 ? dn.stderr_ / dn.value : 0.0;
    const double rel_l = ln.stderr_ / ln.value;
    p.stderr_ = std::abs(p.ratio) * std::sqrt(rel_d * rel_d + rel_l * rel_l);
    out.points.push_back(p);
  }
  out.degenerate_flag = all_ladder_one;

  // Stabilization diagnostic over the top half of the grid.
  std::vector<double> top;
  for (std::size_t i = out.points.size() / 2; i < out.points.size(); ++i) {
    top.push_back(out.points[i].ratio);
  }
  out.mann_kendall_z = mann_kendall_z(top);
  out.mann_kendall_p = mann_kendall_p(top);
  out.stabilized = out.mann_kendall_p >= 0.05;
  return out;
}

TauberianResult tauberian_check(std::span<const double> d, double rho,
                                std::span<const double> s_grid) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::domain_error("tauberian_check: rho must be in (0,1)");
  }
  if (d.size() < 2) throw std::invalid_argument("tauberian_check: d too short");
  const std::size_t n_top = d.size() - 1;
  const double d_last = d[n_top];

  std::vector<double> grid(s_grid.begin(), s_grid.end());
  std::sort(grid.begin(), grid.end());
  TauberianResult out;
  for (double s : grid) {
    if (!(s > 0.0 && s < 1.0)) {
      throw std::invalid_argument("tauberian_check: s must be in (0,1)");
    }
    // Tail bound: d_k <= d_N for k > N gives
    //   sum_{k>N} d_k s^k (1-s)^{1-rho} <= d_N s^{N+1} (1-s)^{-rho}.
    const double tail =
        d_last * std::pow(s, double(n_top + 1)) * std::pow(1.0 - s, -rho);
    if (tail > 1e-6) {
      const double required =
          std::log(1e-6 * std::pow(1.0 - s, rho) / d_last) / std::log(s);
      throw TruncationError(
          "tauberian_check: series too short for s = " + std::to_string(s) +
              "; need d through n ~ " + std::to_string(std::llround(required)),
          static_cast<std::uint64_t>(std::llround(std::ceil(required))));
    }
    KahanSum sum;
    double s_pow = 1.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      sum.add(d[k] * s_pow);
      s_pow *= s;
    }
    out.points.push_back({s, sum.value() * std::pow(1.0 - s, 1.0 - rho)});
  }
  std::vector<double> scaled;
  scaled.reserve(out.points.size());
  for (const auto& p : out.points) scaled.push_back(p.scaled_value);
  out.mann_kendall_z = mann_kendall_z(scaled);
  out.mann_kendall_p = mann_kendall_p(scaled);
  out.stabilized = out.mann_kendall_p >= 0.05;
  return out;
}

}  // namespace bpire
