#include "bpire/stable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bpire {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool stable_params_admissible(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 2.0)) return false;
  if (!(beta >= -1.0 && beta <= 1.0)) return false;
  if (alpha == 1.0 && beta != 0.0) return false;
  if (alpha == 2.0 && beta != 0.0) return false;
  if (alpha < 1.0 && std::abs(beta) == 1.0) return false;
  return true;
}

StableParams::StableParams(double alpha_, double beta_, double scale_c_)
    : alpha(alpha_), beta(beta_), scale_c(scale_c_) {
  if (!stable_params_admissible(alpha, beta)) {
    throw std::invalid_argument("StableParams: (alpha=" + std::to_string(alpha) +
                                ", beta=" + std::to_string(beta) +
                                ") outside the admissible set");
  }
  if (!(scale_c > 0.0) || !std::isfinite(scale_c)) {
    throw std::invalid_argument("StableParams: scale c must be > 0");
  }
}

double StableParams::rho() const {
  if (alpha == 1.0) return 0.5;
  return 0.5 + std::atan(beta * std::tan(kPi * alpha / 2.0)) / (kPi * alpha);
}

double sample_stable_increment(const StableParams& params, CounterRng& rng) {
  const double alpha = params.alpha;
  const double beta = params.beta;
  const double phi = kPi * (uniform_open(rng) - 0.5);  // (-pi/2, pi/2)
  const double w = -std::log(uniform_open(rng));       // Exp(1)

  double x;
  if (alpha == 1.0) {
    x = std::tan(phi);  // beta = 0 only: standard Cauchy
  } else {
    const double zeta = beta * std::tan(kPi * alpha / 2.0);
    const double b = std::atan(zeta) / alpha;
    const double s = std::pow(1.0 + zeta * zeta, 0.5 / alpha);
    x = s * std::sin(alpha * (phi + b)) / std::pow(std::cos(phi), 1.0 / alpha) *
        std::pow(std::cos(phi - alpha * (phi + b)) / w, (1.0 - alpha) / alpha);
  }
  return std::pow(params.scale_c, 1.0 / alpha) * x;
}

}  // namespace bpire
