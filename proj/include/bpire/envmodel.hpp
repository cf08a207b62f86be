#pragma once
// The environment law: i.i.d. pairs Q = (F, G) with independent components.
//
// Offspring means come either from a finite mixture (each atom a geometric
// law, mixture required to be critical: sum w_i log m_i = 0) or from a
// strictly stable log-mean law. Immigration is a finite mixture of
// finite-support pgfs; a deterministic law is a single-atom mixture.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bpire/laws.hpp"
#include "bpire/rng.hpp"
#include "bpire/stable.hpp"

namespace bpire {

struct HypothesisParams {
  double kappa = 0.0;    // lower bound on F(0), in [0,1)
  double gamma = 1.0;    // G(s) <= s^gamma exponent, in (0,1]
  double sigma = 1.0;    // check interval is [kappa^sigma, 1], sigma in (0,1]
  double epsilon = 1.0;  // slack in the log-moment condition, > 0

  void validate() const;
};

struct EnvStep {
  OffspringLaw offspring;
  const ImmigrationLaw* immigration;  // borrowed from the model, immutable
};

class EnvironmentModel {
 public:
  struct OffspringAtom {
    double weight;
    OffspringLaw law;
  };
  struct ImmigrationAtom {
    double weight;
    ImmigrationLaw law;
  };

  static EnvironmentModel finite_mixture(std::vector<OffspringAtom> offspring,
                                         std::vector<ImmigrationAtom> immigration,
                                         HypothesisParams hyp,
                                         std::string name = "custom");

  static EnvironmentModel stable_log_mean(StableParams params,
                                          std::vector<ImmigrationAtom> immigration,
                                          HypothesisParams hyp,
                                          std::string name = "custom");

  bool offspring_finite() const { return !offspring_atoms_.empty(); }
  const std::vector<OffspringAtom>& offspring_atoms() const { return offspring_atoms_; }
  const std::optional<StableParams>& stable_params() const { return stable_; }
  const std::vector<ImmigrationAtom>& immigration_atoms() const { return immigration_atoms_; }
  const HypothesisParams& hypothesis() const { return hyp_; }
  const std::string& name() const { return name_; }

  // One environment step: F and G drawn independently.
  EnvStep sample_environment_step(CounterRng& rng) const;
  OffspringLaw sample_offspring(CounterRng& rng) const;
  const ImmigrationLaw& sample_immigration(CounterRng& rng) const;

  // Walk increment X = log m(F); consumes exactly the draws of
  // sample_offspring.
  double sample_increment(CounterRng& rng) const;

  // Mixture-averaged immigration pgf E[G(s)].
  double mean_pgf(double s) const;
  // E[(1 - G(s)) / (1 - G(0))]; the survival kernel of the initial law.
  // Requires G(0) < 1 for every atom.
  double psi(double s) const;

  // True when every immigration atom puts mass on positive states, i.e. the
  // conditioned-positive initial law exists.
  bool initial_law_ok() const;

  // inf F(0) over the offspring component (0 for stable log-means).
  double min_f0() const;

  // X == 0 a.s.; the associated walk does not oscillate.
  bool walk_degenerate() const;

  // Analytic positivity parameter where known: the stable formula, or 1/2 for
  // nondegenerate critical finite mixtures (central limit theorem).
  std::optional<double> spitzer_rho() const;

  // Largest |X| the finite mixture can produce (walk-grid coverage checks);
  // empty for stable log-means.
  std::optional<double> max_abs_increment() const;

 private:
  EnvironmentModel() = default;

  std::vector<OffspringAtom> offspring_atoms_;
  std::optional<StableParams> stable_;
  std::vector<ImmigrationAtom> immigration_atoms_;
  HypothesisParams hyp_;
  std::string name_;
  std::vector<double> offspring_cum_;
  std::vector<double> immigration_cum_;
};

// Named presets: "example2", "deterministic-critical", "stable(alpha,beta)"
// with an optional third scale argument, e.g. "stable(1.5,1,2.0)".
EnvironmentModel preset_model(std::string_view name);

// JSON document <-> model (schema in the README).
EnvironmentModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const EnvironmentModel& model);

}  // namespace bpire
