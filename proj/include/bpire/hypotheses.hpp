#pragma once
// Validators for the standing assumptions on the environment law.
//
// A2: F(0) >= kappa a.s. and G(s) <= s^gamma on [kappa^sigma, 1] a.s.
// A3: nonlattice increments (declared, not checked), positivity parameter in
//     (0,1), and finiteness of two log-moments of G'(1).

#include <optional>
#include <string>
#include <vector>

#include "bpire/envmodel.hpp"

namespace bpire {

struct A2Report {
  bool pass = false;
  double worst_margin = 0.0;  // min over atoms of min_s (s^gamma - G(s))
  double worst_s = 1.0;
  double kappa_margin = 0.0;  // inf F(0) - kappa
  double grid_min = 0.0;      // dense-grid minimum (diagnostic only)
  bool analytic_available = false;  // polynomial critical-point analysis ran
};

// The grid is 10^4 uniform points; for rational gamma = a/b the margin is a
// polynomial in t = s^(1/b) and the analytic minimum over its critical points
// decides the verdict. Tolerance: margins down to -1e-12 still pass.
A2Report validate_hypothesis_A2(const EnvironmentModel& model);

struct A3Report {
  enum class Status { pass, fail, unverified };
  Status status = Status::unverified;
  std::optional<double> rho_used;
  double epsilon = 0.0;
  bool nonlattice_assumed = true;  // recorded assumption, never verified
  std::string note;
};

A3Report validate_hypothesis_A3(const EnvironmentModel& model);

// Helper for laws with a Pareto-type tail P(log+ G'(1) > x) ~ x^-k: the
// moment E (log+ G'(1))^(1/rho + eps) is finite for some eps > 0 iff
// 1/rho < k.
bool a3_log_tail_moment_finite(double rho, double tail_exponent);

}  // namespace bpire
