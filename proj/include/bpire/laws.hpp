#pragma once
// Offspring and immigration reproduction laws.
//
// Offspring is always geometric: the pgf is determined by its mean alone,
//   F(s) = 1/(1 + m(1-s)),  F(0) = 1/(1+m),  log-mean X = log m.
// Immigration laws are finite-support pgfs G on {0,...,K}.

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpire/rng.hpp"

namespace bpire {

inline constexpr double kWeightSumTol = 1e-12;

class OffspringLaw {
 public:
  explicit OffspringLaw(double mean_m) : mean_(mean_m) {
    if (!(mean_m > 0.0) || !std::isfinite(mean_m)) {
      throw std::invalid_argument("OffspringLaw: mean must be finite and > 0");
    }
  }

  double mean() const { return mean_; }
  double log_mean() const { return std::log(mean_); }

  // p + q = 1, m = p/q.
  double success_p() const { return mean_ / (1.0 + mean_); }
  double failure_q() const { return 1.0 / (1.0 + mean_); }

  double prob_zero() const { return 1.0 / (1.0 + mean_); }

  // Evaluated as 1 - m(1-s)/(1 + m(1-s)); exact 1 at s = 1, no pole on [0,1].
  double pgf(double s) const {
    const double g = mean_ * (1.0 - s);
    return 1.0 - g / (1.0 + g);
  }

  // Geometric draw on {0,1,...} with P(k) = q p^k.
  std::uint64_t sample(CounterRng& rng) const {
    const double u = uniform_open(rng);
    const double k = std::floor(std::log(u) / std::log(success_p()));
    if (!(k < 9.2e18)) return ~0ULL >> 1;
    return static_cast<std::uint64_t>(k);
  }

 private:
  double mean_;
};

class ImmigrationLaw {
 public:
  enum class Kind { finite_support, at_least_one_uniform, custom_polynomial };

  static ImmigrationLaw finite_support(std::vector<double> probs) {
    return ImmigrationLaw(std::move(probs), Kind::finite_support);
  }

  // Uniform on {1,...,k_max}: at least one immigrant whenever any arrive.
  static ImmigrationLaw at_least_one_uniform(int k_max) {
    if (k_max < 1) throw std::invalid_argument("at_least_one_uniform: k_max >= 1");
    std::vector<double> p(static_cast<std::size_t>(k_max) + 1, 1.0 / k_max);
    p[0] = 0.0;
    return ImmigrationLaw(std::move(p), Kind::at_least_one_uniform);
  }

  // pgf coefficients given directly; must form a probability vector.
  static ImmigrationLaw custom_polynomial(std::vector<double> coeffs) {
    return ImmigrationLaw(std::move(coeffs), Kind::custom_polynomial);
  }

  Kind kind() const { return kind_; }
  std::span<const double> probabilities() const { return probs_; }

  double pgf(double s) const {
    double acc = 0.0;  // Horner
    for (std::size_t i = probs_.size(); i-- > 0;) acc = acc * s + probs_[i];
    return acc;
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 1; k < probs_.size(); ++k) m += double(k) * probs_[k];
    return m;
  }

  double prob_zero() const { return probs_[0]; }

  std::uint64_t sample(CounterRng& rng) const {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs_.size(); ++k) {
      acc += probs_[k];
      if (u < acc) return k;
    }
    return probs_.size() - 1;
  }

  // Draw conditioned on {>= 1}; the initial-population law.
  std::uint64_t sample_positive(CounterRng& rng) const {
    if (!(probs_[0] < 1.0)) {
      throw std::domain_error("ImmigrationLaw: G(0) = 1, no mass on positive states");
    }
    const double u = uniform01(rng) * (1.0 - probs_[0]);
    double acc = 0.0;
    for (std::size_t k = 1; k + 1 < probs_.size(); ++k) {
      acc += probs_[k];
      if (u < acc) return k;
    }
    return probs_.size() - 1;
  }

 private:
  ImmigrationLaw(std::vector<double> probs, Kind kind)
      : probs_(std::move(probs)), kind_(kind) {
    if (probs_.empty()) throw std::invalid_argument("ImmigrationLaw: empty support");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("ImmigrationLaw: negative or non-finite mass");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kWeightSumTol) {
      throw std::invalid_argument("ImmigrationLaw: probabilities sum to " +
                                  std::to_string(sum) + ", expected 1");
    }
  }

  std::vector<double> probs_;
  Kind kind_;
};

}  // namespace bpire
