#include "adrsig/simulator.hpp"

#include <cmath>
#include <istream>
#include <stdexcept>

#include "adrsig/key_value.hpp"

namespace adrsig {

MarkovParams derive_markov_params(double prob_exposed, double mean_duration, int horizon) {
  if (!(prob_exposed > 0.0 && prob_exposed < 1.0)) {
    throw std::invalid_argument("prob_exposed must lie in (0,1)");
  }
  if (!(mean_duration >= 1.0) || !std::isfinite(mean_duration)) {
    throw std::invalid_argument("mean_duration must be >= 1");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  return {1.0 - std::pow(1.0 - prob_exposed, 1.0 / horizon), (mean_duration - 1.0) / mean_duration};
}

BinarySeries simulate_exposure(const MarkovParams& params, int horizon, StreamRng& rng) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(params.nu0 >= 0.0 && params.nu0 <= 1.0 && params.nu1 >= 0.0 && params.nu1 <= 1.0)) {
    throw std::invalid_argument("Markov transition probabilities must lie in [0,1]");
  }
  BinarySeries x(static_cast<std::size_t>(horizon));
  bool previous = false;
  for (auto& v : x) {
    previous = rng.bernoulli(previous ? params.nu1 : params.nu0);
    v = previous ? 1 : 0;
  }
  return x;
}

BinarySeries simulate_adr(const RiskFunction& risk, const ModelParams& probs,
                          std::span<const std::uint8_t> exposure, StreamRng& rng) {
  if (!(probs.pi0 >= 0.0 && probs.pi0 <= 1.0 && probs.pi1 >= 0.0 && probs.pi1 <= 1.0)) {
    throw std::invalid_argument("pi0 and pi1 must lie in [0,1]");
  }
  BinarySeries y(exposure.size());
  FeatureTracker tracker;
  for (std::size_t t = 0; t < exposure.size(); ++t) {
    const auto f = tracker.advance(exposure[t] != 0);
    y[t] = rng.bernoulli(adr_probability(probs, risk(f))) ? 1 : 0;
  }
  return y;
}

void validate(const SimulationConfig& c) {
  if (c.n_patients < 1) throw std::invalid_argument("n_patients must be >= 1");
  (void)derive_markov_params(c.prob_exposed, c.mean_duration, c.horizon);
  if (!(c.pi0 >= 0.0 && c.pi0 <= 1.0 && c.pi1 >= 0.0 && c.pi1 <= 1.0)) {
    throw std::invalid_argument("pi0 and pi1 must lie in [0,1]");
  }
  if (c.model.horizon != 0 && c.model.horizon != c.horizon) {
    throw std::invalid_argument("model horizon T differs from the simulation horizon");
  }
  auto model = c.model;
  model.horizon = c.horizon;
  validate(model);
}

Cohort simulate_cohort(const SimulationConfig& config, PairLabel label) {
  validate(config);
  auto model = config.model;
  model.horizon = config.horizon;
  const RiskFunction risk(model);
  const auto chain = derive_markov_params(config.prob_exposed, config.mean_duration, config.horizon);
  const ModelParams probs{config.pi0, config.pi1};

  std::vector<PatientRecord> patients(static_cast<std::size_t>(config.n_patients));
  for (std::size_t k = 0; k < patients.size(); ++k) {
    StreamRng rng(derive_seed(config.seed, {k}));
    auto& p = patients[k];
    p.id = "p" + std::to_string(k + 1);
    p.exposure = simulate_exposure(chain, config.horizon, rng);
    p.adr = simulate_adr(risk, probs, p.exposure, rng);
  }
  return Cohort(std::move(patients), std::move(label));
}

void apply_simulation_setting(SimulationConfig& c, const std::string& key, const std::string& value) {
  if (key == "n_patients" || key == "N") {
    c.n_patients = static_cast<int>(parse_integer(value));
  } else if (key == "horizon" || key == "T") {
    c.horizon = static_cast<int>(parse_integer(value));
  } else if (key == "prob_exposed" || key == "mu_E") {
    c.prob_exposed = parse_real(value);
  } else if (key == "mean_duration" || key == "delta") {
    c.mean_duration = parse_real(value);
  } else if (key == "pi0") {
    c.pi0 = parse_real(value);
  } else if (key == "pi1") {
    c.pi1 = parse_real(value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_integer(value));
  } else if (key == "model") {
    c.model = parse_spec(value);
  } else {
    throw std::invalid_argument("unknown simulation setting '" + key + "'");
  }
}

SimulationConfig parse_simulation_config(std::istream& in) {
  SimulationConfig config;
  for (const auto& kv : parse_key_values(in)) {
    try {
      apply_simulation_setting(config, kv.key, kv.value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  validate(config);
  return config;
}

}  // namespace adrsig
