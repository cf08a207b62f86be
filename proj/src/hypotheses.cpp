#include "bpire/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace bpire {

namespace {

constexpr double kMarginSlack = 1e-12;
constexpr int kGridPoints = 10000;

// gamma as a small fraction a/b, if one matches to 1e-12.
std::optional<std::pair<int, int>> as_rational(double gamma) {
  for (int b = 1; b <= 64; ++b) {
    const double a_real = gamma * b;
    const int a = static_cast<int>(std::lround(a_real));
    if (a >= 1 && std::abs(a_real - a) < 1e-12 * b) return std::make_pair(a, b);
  }
  return std::nullopt;
}

// Real roots of a polynomial (coefficients low->high) inside (lo, hi),
// via the companion matrix.
std::vector<double> real_roots_in(std::vector<double> c, double lo, double hi) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  std::vector<double> roots;
  if (c.size() <= 1) return roots;  // constant: no roots (zero poly handled upstream)
  const int d = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / c[d];
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  for (int i = 0; i < d; ++i) {
    const auto z = es.eigenvalues()[i];
    if (std::abs(z.imag()) < 1e-9 && z.real() > lo && z.real() < hi) {
      roots.push_back(z.real());
    }
  }
  return roots;
}

double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

struct MarginMin {
  double value = std::numeric_limits<double>::infinity();
  double at_s = 1.0;
  void consider(double v, double s) {
    if (v < value) {
      value = v;
      at_s = s;
    }
  }
};

// Analytic minimum of s^gamma - G(s) on [s_lo, 1] for rational gamma = a/b:
// substitute s = t^b and scan the critical points of the polynomial
// h(t) = t^a - G(t^b).
std::optional<MarginMin> analytic_margin_min(const ImmigrationLaw& law,
                                             int a, int b, double s_lo) {
  const auto probs = law.probabilities();
  const int deg_h = std::max(a, b * (static_cast<int>(probs.size()) - 1));
  std::vector<double> h(static_cast<std::size_t>(deg_h) + 1, 0.0);
  h[a] += 1.0;
  for (std::size_t k = 0; k < probs.size(); ++k) h[k * b] -= probs[k];

  const double t_lo = std::pow(s_lo, 1.0 / b);
  MarginMin mm;
  mm.consider(poly_eval(h, t_lo), s_lo);
  mm.consider(poly_eval(h, 1.0), 1.0);

  bool all_zero = std::all_of(h.begin(), h.end(), [](double x) { return x == 0.0; });
  if (all_zero) return mm;  // G(s) == s^gamma identically

  std::vector<double> dh(h.size() - 1);
  for (std::size_t i = 1; i < h.size(); ++i) dh[i - 1] = h[i] * double(i);
  for (double t : real_roots_in(std::move(dh), t_lo, 1.0)) {
    mm.consider(poly_eval(h, t), std::pow(t, double(b)));
  }
  return mm;
}

}  // namespace

A2Report validate_hypothesis_A2(const EnvironmentModel& model) {
  const auto& hyp = model.hypothesis();
  A2Report rep;
  rep.kappa_margin = model.min_f0() - hyp.kappa;

  const double s_lo = hyp.kappa == 0.0 ? 0.0 : std::pow(hyp.kappa, hyp.sigma);

  MarginMin grid, analytic;
  bool analytic_ok = true;
  const auto frac = as_rational(hyp.gamma);

  for (const auto& atom : model.immigration_atoms()) {
    for (int i = 0; i <= kGridPoints; ++i) {
      const double s = s_lo + (1.0 - s_lo) * double(i) / kGridPoints;
      grid.consider(std::pow(s, hyp.gamma) - atom.law.pgf(s), s);
    }
    if (frac) {
      auto mm = analytic_margin_min(atom.law, frac->first, frac->second, s_lo);
      if (mm) {
        analytic.consider(mm->value, mm->at_s);
      } else {
        analytic_ok = false;
      }
    } else {
      analytic_ok = false;
    }
  }

  rep.grid_min = grid.value;
  rep.analytic_available = analytic_ok;
  if (analytic_ok) {
    // The analytic minimum dominates: a clean grid cannot overturn it.
    rep.worst_margin = std::min(analytic.value, grid.value);
    rep.worst_s = analytic.value <= grid.value ? analytic.at_s : grid.at_s;
  } else {
    rep.worst_margin = grid.value;
    rep.worst_s = grid.at_s;
  }
  rep.pass = rep.kappa_margin >= -kMarginSlack && rep.worst_margin >= -kMarginSlack;
  return rep;
}

bool a3_log_tail_moment_finite(double rho, double tail_exponent) {
  if (!(rho > 0.0 && rho < 1.0)) return false;
  // E T^p < inf iff p < tail_exponent; need some eps > 0 with
  // 1/rho + eps admissible.
  return 1.0 / rho < tail_exponent;
}

A3Report validate_hypothesis_A3(const EnvironmentModel& model) {
  A3Report rep;
  rep.epsilon = model.hypothesis().epsilon;
  rep.rho_used = model.spitzer_rho();

  if (model.walk_degenerate()) {
    rep.status = A3Report::Status::fail;
    rep.note = "degenerate walk (X = 0 a.s.): P(S_n > 0) does not converge into (0,1)";
    return rep;
  }
  if (!rep.rho_used) {
    rep.status = A3Report::Status::unverified;
    rep.note = "no analytic positivity parameter for this offspring component";
    return rep;
  }

  double max_log_mean = 0.0;
  for (const auto& a : model.immigration_atoms()) {
    max_log_mean = std::max(max_log_mean, std::log(std::max(1.0, a.law.mean())));
  }
  if (max_log_mean == 0.0) {
    rep.status = A3Report::Status::pass;
    rep.note = "log+ G'(1) = 0 a.s.; both moments vanish for every epsilon";
  } else {
    // Finitely many immigration atoms: log+ G'(1) is bounded, so the first
    // moment is finite for every epsilon and E (U(X) log+ G'(1))^(1+eps) is
    // finite for eps < rho/(1-rho).
    rep.status = A3Report::Status::pass;
    rep.note = "finite immigration support: log+ G'(1) bounded by " +
               std::to_string(max_log_mean);
  }
  return rep;
}

}  // namespace bpire
