#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "adrsig/cohort.hpp"
#include "adrsig/estimation.hpp"
#include "adrsig/random.hpp"
#include "adrsig/risk_models.hpp"

namespace adrsig {

/// Two-state exposure chain: P(X(1)=1) = nu0, P(X(t)=1 | X(t-1)=0) = nu0,
/// P(X(t)=1 | X(t-1)=1) = nu1.
struct MarkovParams {
  double nu0 = 0.0;
  double nu1 = 0.0;
};

/// nu0 = 1 - (1 - prob_exposed)^(1/T) so that P(ever exposed) = prob_exposed,
/// and nu1 = (mean_duration - 1) / mean_duration for a geometric spell length
/// with the requested mean. Throws std::invalid_argument.
MarkovParams derive_markov_params(double prob_exposed, double mean_duration, int horizon);

/// Draws T exposure points, one uniform per point. Accepts any nu0, nu1 in [0,1].
BinarySeries simulate_exposure(const MarkovParams& params, int horizon, StreamRng& rng);

/// Draws ADR occurrences given a fixed exposure history, one uniform per point.
BinarySeries simulate_adr(const RiskFunction& risk, const ModelParams& probs,
                          std::span<const std::uint8_t> exposure, StreamRng& rng);

struct SimulationConfig {
  int n_patients = 1000;
  int horizon = 100;
  double prob_exposed = 0.1;  // mu_E
  double mean_duration = 5.0;  // delta
  ModelSpec model{};
  double pi0 = 1e-4;
  double pi1 = 0.1;
  std::uint64_t seed = 0;
};

void validate(const SimulationConfig& config);

/// Patient k (0-based) draws from StreamRng(derive_seed(seed, {k})): first its
/// exposure, then its ADRs. Ids are "p1".."pN".
Cohort simulate_cohort(const SimulationConfig& config, PairLabel label = {"drug", "adr"});

/// Flat `key = value` config: n_patients, horizon, prob_exposed, mean_duration,
/// pi0, pi1, seed, model (a model spec string). Unknown keys are errors.
SimulationConfig parse_simulation_config(std::istream& in);
void apply_simulation_setting(SimulationConfig& config, const std::string& key, const std::string& value);

}  // namespace adrsig
