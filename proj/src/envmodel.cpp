#include "bpire/envmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace bpire {

using nlohmann::json;

void HypothesisParams::validate() const {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw std::invalid_argument("HypothesisParams: kappa must be in [0,1)");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("HypothesisParams: gamma must be in (0,1]");
  }
  if (!(sigma > 0.0 && sigma <= 1.0)) {
    throw std::invalid_argument("HypothesisParams: sigma must be in (0,1]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("HypothesisParams: epsilon must be > 0");
  }
}

namespace {

template <class Atom>
std::vector<double> cumulative_weights(const std::vector<Atom>& atoms,
                                       const char* what) {
  if (atoms.empty()) {
    throw std::invalid_argument(std::string(what) + ": mixture has no atoms");
  }
  double sum = 0.0;
  std::vector<double> cum;
  cum.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw std::invalid_argument(std::string(what) + ": weights must be > 0");
    }
    sum += a.weight;
    cum.push_back(sum);
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw std::invalid_argument(std::string(what) + ": weights sum to " +
                                std::to_string(sum) + ", expected 1");
  }
  return cum;
}

std::size_t pick_atom(const std::vector<double>& cum, CounterRng& rng) {
  const double u = uniform01(rng);
  std::size_t i = 0;
  while (i + 1 < cum.size() && u >= cum[i]) ++i;
  return i;
}

}  // namespace

EnvironmentModel EnvironmentModel::finite_mixture(
    std::vector<OffspringAtom> offspring, std::vector<ImmigrationAtom> immigration,
    HypothesisParams hyp, std::string name) {
  hyp.validate();
  EnvironmentModel m;
  m.offspring_cum_ = cumulative_weights(offspring, "offspring mixture");
  m.immigration_cum_ = cumulative_weights(immigration, "immigration mixture");

  // Criticality of the associated walk: E[log m] = 0.
  double mean_log = 0.0;
  for (const auto& a : offspring) mean_log += a.weight * a.law.log_mean();
  if (std::abs(mean_log) > kWeightSumTol) {
    throw std::invalid_argument("offspring mixture: E[log m] = " +
                                std::to_string(mean_log) + ", expected 0");
  }

  m.offspring_atoms_ = std::move(offspring);
  m.immigration_atoms_ = std::move(immigration);
  m.hyp_ = hyp;
  m.name_ = std::move(name);
  return m;
}

EnvironmentModel EnvironmentModel::stable_log_mean(
    StableParams params, std::vector<ImmigrationAtom> immigration,
    HypothesisParams hyp, std::string name) {
  hyp.validate();
  EnvironmentModel m;
  m.stable_ = params;
  m.immigration_cum_ = cumulative_weights(immigration, "immigration mixture");
  m.immigration_atoms_ = std::move(immigration);
  m.hyp_ = hyp;
  m.name_ = std::move(name);
  return m;
}

OffspringLaw EnvironmentModel::sample_offspring(CounterRng& rng) const {
  if (stable_) {
    return OffspringLaw(std::exp(sample_stable_increment(*stable_, rng)));
  }
  if (offspring_atoms_.size() == 1) return offspring_atoms_[0].law;
  return offspring_atoms_[pick_atom(offspring_cum_, rng)].law;
}

const ImmigrationLaw& EnvironmentModel::sample_immigration(CounterRng& rng) const {
  if (immigration_atoms_.size() == 1) return immigration_atoms_[0].law;
  return immigration_atoms_[pick_atom(immigration_cum_, rng)].law;
}

EnvStep EnvironmentModel::sample_environment_step(CounterRng& rng) const {
  OffspringLaw f = sample_offspring(rng);
  const ImmigrationLaw& g = sample_immigration(rng);
  return EnvStep{f, &g};
}

double EnvironmentModel::sample_increment(CounterRng& rng) const {
  if (stable_) return sample_stable_increment(*stable_, rng);
  if (offspring_atoms_.size() == 1) return offspring_atoms_[0].law.log_mean();
  return offspring_atoms_[pick_atom(offspring_cum_, rng)].law.log_mean();
}

double EnvironmentModel::mean_pgf(double s) const {
  double acc = 0.0;
  for (const auto& a : immigration_atoms_) acc += a.weight * a.law.pgf(s);
  return acc;
}

double EnvironmentModel::psi(double s) const {
  double acc = 0.0;
  for (const auto& a : immigration_atoms_) {
    const double g0 = a.law.prob_zero();
    if (!(g0 < 1.0)) {
      throw std::domain_error("psi: immigration atom with G(0) = 1");
    }
    acc += a.weight * (1.0 - a.law.pgf(s)) / (1.0 - g0);
  }
  return acc;
}

bool EnvironmentModel::initial_law_ok() const {
  for (const auto& a : immigration_atoms_) {
    if (!(a.law.prob_zero() < 1.0)) return false;
  }
  return true;
}

double EnvironmentModel::min_f0() const {
  if (stable_) return 0.0;  // log m is unbounded above
  double f0 = 1.0;
  for (const auto& a : offspring_atoms_) f0 = std::min(f0, a.law.prob_zero());
  return f0;
}

bool EnvironmentModel::walk_degenerate() const {
  if (stable_) return false;
  for (const auto& a : offspring_atoms_) {
    if (a.law.log_mean() != 0.0) return false;
  }
  return true;
}

std::optional<double> EnvironmentModel::spitzer_rho() const {
  if (stable_) return stable_->rho();
  if (walk_degenerate()) return std::nullopt;
  // Critical finite mixture: mean-zero, finite-variance increments.
  return 0.5;
}

std::optional<double> EnvironmentModel::max_abs_increment() const {
  if (stable_) return std::nullopt;
  double m = 0.0;
  for (const auto& a : offspring_atoms_) {
    m = std::max(m, std::abs(a.law.log_mean()));
  }
  return m;
}

namespace {

ImmigrationLaw example_g() {
  // G(s) = (2/3) s^2 + 1/3
  return ImmigrationLaw::finite_support({1.0 / 3.0, 0.0, 2.0 / 3.0});
}

EnvironmentModel make_example2() {
  std::vector<EnvironmentModel::OffspringAtom> off{
      {0.5, OffspringLaw(63.0)}, {0.5, OffspringLaw(1.0 / 63.0)}};
  std::vector<EnvironmentModel::ImmigrationAtom> imm{{1.0, example_g()}};
  HypothesisParams hyp{1.0 / 64.0, 1.0 / 3.0, 0.5, 1.0};
  return EnvironmentModel::finite_mixture(std::move(off), std::move(imm), hyp,
                                          "example2");
}

EnvironmentModel make_deterministic_critical() {
  std::vector<EnvironmentModel::OffspringAtom> off{{1.0, OffspringLaw(1.0)}};
  std::vector<EnvironmentModel::ImmigrationAtom> imm{{1.0, example_g()}};
  HypothesisParams hyp{0.5, 1.0 / 3.0, 0.5, 1.0};
  return EnvironmentModel::finite_mixture(std::move(off), std::move(imm), hyp,
                                          "deterministic-critical");
}

EnvironmentModel make_stable(double alpha, double beta, double c,
                             std::string name) {
  // One immigrant per allowed generation: G(s) = s, the kappa = 0 regime.
  std::vector<EnvironmentModel::ImmigrationAtom> imm{
      {1.0, ImmigrationLaw::finite_support({0.0, 1.0})}};
  HypothesisParams hyp{0.0, 1.0, 1.0, 1.0};
  return EnvironmentModel::stable_log_mean(StableParams(alpha, beta, c),
                                           std::move(imm), hyp, std::move(name));
}

}  // namespace

EnvironmentModel preset_model(std::string_view name) {
  if (name == "example2") return make_example2();
  if (name == "deterministic-critical") return make_deterministic_critical();
  if (name.starts_with("stable(") && name.ends_with(")")) {
    std::string args(name.substr(7, name.size() - 8));
    std::replace(args.begin(), args.end(), ',', ' ');
    double alpha = 0.0, beta = 0.0, c = 1.0;
    const int got = std::sscanf(args.c_str(), "%lf %lf %lf", &alpha, &beta, &c);
    if (got >= 2) return make_stable(alpha, beta, c, std::string(name));
  }
  throw std::invalid_argument("unknown preset: " + std::string(name));
}

namespace {

ImmigrationLaw immigration_law_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite_support") {
    return ImmigrationLaw::finite_support(j.at("probs").get<std::vector<double>>());
  }
  if (kind == "at_least_one_uniform") {
    return ImmigrationLaw::at_least_one_uniform(j.at("k_max").get<int>());
  }
  if (kind == "custom_polynomial") {
    return ImmigrationLaw::custom_polynomial(j.at("coeffs").get<std::vector<double>>());
  }
  throw std::invalid_argument("immigration law: unknown kind '" + kind + "'");
}

json immigration_law_to_json(const ImmigrationLaw& law) {
  json j;
  switch (law.kind()) {
    case ImmigrationLaw::Kind::finite_support:
      j["kind"] = "finite_support";
      j["probs"] = std::vector<double>(law.probabilities().begin(),
                                       law.probabilities().end());
      break;
    case ImmigrationLaw::Kind::at_least_one_uniform:
      j["kind"] = "at_least_one_uniform";
      j["k_max"] = static_cast<int>(law.probabilities().size()) - 1;
      break;
    case ImmigrationLaw::Kind::custom_polynomial:
      j["kind"] = "custom_polynomial";
      j["coeffs"] = std::vector<double>(law.probabilities().begin(),
                                        law.probabilities().end());
      break;
  }
  return j;
}

}  // namespace

EnvironmentModel model_from_json_text(const std::string& text) {
  const json j = json::parse(text);

  HypothesisParams hyp;
  if (j.contains("hypothesis")) {
    const json& h = j.at("hypothesis");
    hyp.kappa = h.value("kappa", 0.0);
    hyp.gamma = h.value("gamma", 1.0);
    hyp.sigma = h.value("sigma", 1.0);
    hyp.epsilon = h.value("epsilon", 1.0);
  }

  std::vector<EnvironmentModel::ImmigrationAtom> imm;
  const json& ji = j.at("immigration");
  const std::string ikind = ji.at("kind").get<std::string>();
  if (ikind == "deterministic") {
    imm.push_back({1.0, immigration_law_from_json(ji.at("law"))});
  } else if (ikind == "finite_mixture") {
    for (const auto& a : ji.at("atoms")) {
      imm.push_back({a.at("weight").get<double>(),
                     immigration_law_from_json(a.at("law"))});
    }
  } else {
    throw std::invalid_argument("immigration: unknown kind '" + ikind + "'");
  }

  const json& jo = j.at("offspring");
  const std::string okind = jo.at("kind").get<std::string>();
  if (okind == "finite_mixture") {
    std::vector<EnvironmentModel::OffspringAtom> off;
    for (const auto& a : jo.at("atoms")) {
      off.push_back({a.at("weight").get<double>(),
                     OffspringLaw(a.at("mean").get<double>())});
    }
    return EnvironmentModel::finite_mixture(std::move(off), std::move(imm), hyp,
                                            j.value("name", "custom"));
  }
  if (okind == "stable_log_mean") {
    StableParams p(jo.at("alpha").get<double>(), jo.at("beta").get<double>(),
                   jo.value("scale_c", 1.0));
    return EnvironmentModel::stable_log_mean(p, std::move(imm), hyp,
                                             j.value("name", "custom"));
  }
  throw std::invalid_argument("offspring: unknown kind '" + okind + "'");
}

std::string model_to_json_text(const EnvironmentModel& model) {
  json j;
  j["name"] = model.name();
  if (model.offspring_finite()) {
    json atoms = json::array();
    for (const auto& a : model.offspring_atoms()) {
      atoms.push_back({{"weight", a.weight}, {"mean", a.law.mean()}});
    }
    j["offspring"] = {{"kind", "finite_mixture"}, {"atoms", atoms}};
  } else {
    const auto& p = *model.stable_params();
    j["offspring"] = {{"kind", "stable_log_mean"},
                      {"alpha", p.alpha},
                      {"beta", p.beta},
                      {"scale_c", p.scale_c}};
  }
  if (model.immigration_atoms().size() == 1) {
    j["immigration"] = {
        {"kind", "deterministic"},
        {"law", immigration_law_to_json(model.immigration_atoms()[0].law)}};
  } else {
    json atoms = json::array();
    for (const auto& a : model.immigration_atoms()) {
      atoms.push_back(
          {{"weight", a.weight}, {"law", immigration_law_to_json(a.law)}});
    }
    j["immigration"] = {{"kind", "finite_mixture"}, {"atoms", atoms}};
  }
  const auto& h = model.hypothesis();
  j["hypothesis"] = {{"kappa", h.kappa},
                     {"gamma", h.gamma},
                     {"sigma", h.sigma},
                     {"epsilon", h.epsilon}};
  return j.dump(2);
}

}  // namespace bpire
