#pragma once
// Strictly stable increment laws for the associated random walk.
//
// Parameterized by the characteristic function
//   exp{ -c|t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)) },
// i.e. the "S1" convention with zero location. For alpha > 1 this law has
// mean zero; for alpha != 1 it is strictly stable, so partial sums keep the
// same positivity parameter at every n.

#include <cstdint>

#include "bpire/rng.hpp"

namespace bpire {

// Admissible (alpha, beta) pairs: the walk must oscillate and the positivity
// parameter must land in (0,1). Rejects alpha=1 with skew, alpha=2 with skew,
// and totally skewed laws with alpha < 1.
bool stable_params_admissible(double alpha, double beta);

struct StableParams {
  double alpha;
  double beta;
  double scale_c;

  StableParams(double alpha_, double beta_, double scale_c_);

  // Positivity parameter rho = lim P(S_n > 0).
  double rho() const;
};

// Chambers-Mallows-Stuck draw; exact for the law above (the scale enters as
// c^(1/alpha)).
double sample_stable_increment(const StableParams& params, CounterRng& rng);

}  // namespace bpire
