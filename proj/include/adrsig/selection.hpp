#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "adrsig/estimation.hpp"

namespace adrsig {

/// How many parameters the BIC charges each model.
///  - EstimatedParameters: q + 2, except the null model, which only
///    estimates pi0 and is charged 1.
///  - Uniform: q + 2 for every model, the null included. Under this
///    convention the current-use model (same charge, nests the null) always
///    scores at least as well as the null, so the null posterior never
///    reaches 1/2; kept for sensitivity analysis.
enum class PenaltyConvention { EstimatedParameters, Uniform };

std::string_view to_string(PenaltyConvention c) noexcept;
PenaltyConvention parse_penalty_convention(std::string_view name);

int penalized_params(const FitResult& fit, PenaltyConvention convention) noexcept;

/// k log(N) - 2 loglik with N the number of patients. Throws
/// std::invalid_argument for N < 1 or a non-finite loglik.
double bic(const FitResult& fit, PenaltyConvention convention = PenaltyConvention::EstimatedParameters);

/// exp(-BIC_v / 2) normalised over v, evaluated with a max shift.
std::vector<double> posteriors(std::span<const double> bics);

struct ModelComparison {
  std::vector<FitResult> fits;
  std::vector<double> bic;
  std::vector<double> posterior;
  PenaltyConvention penalty = PenaltyConvention::EstimatedParameters;

  /// Position of the null model in `fits`.
  std::size_t null_index() const;
};

/// Scores a candidate set; it must contain the null model.
ModelComparison compare_models(std::vector<FitResult> fits,
                               PenaltyConvention penalty = PenaltyConvention::EstimatedParameters);

/// Relative tolerance under which two log-likelihoods count as tied.
inline constexpr double kLoglikTieTolerance = 1e-9;

/// argmin BIC; ties go to the earlier candidate.
std::size_t select_by_bic(const ModelComparison& comparison);
/// argmax loglik; near-ties go to the model with fewer parameters, then to the
/// earlier candidate, so a nested null tie selects the null.
std::size_t select_by_max_likelihood(const ModelComparison& comparison);

struct SignalReport {
  PairLabel pair;
  double null_posterior = 1.0;
  bool decision_posterior = false;  // null_posterior < threshold
  bool decision_maxlik = false;     // max-likelihood model is not the null
  FitResult best_model;             // argmin BIC
  double rank_key = 1.0;            // = null_posterior; lower is a stronger signal
  ModelComparison comparison;
};

inline constexpr double kDefaultPosteriorThreshold = 0.5;

SignalReport decide(const ModelComparison& comparison, PairLabel pair = {},
                    double threshold = kDefaultPosteriorThreshold);

/// Ascending by null posterior, stable.
std::vector<SignalReport> rank_pairs(std::vector<SignalReport> reports);
/// The permutation rank_pairs applies: position i holds the input index of
/// the i-th ranked report.
std::vector<std::size_t> rank_order(std::span<const SignalReport> reports);

struct SweepPoint {
  int p = 0;  // 0 = current-use model
  double bic = 0.0;
};

/// BIC of the current-use model (p = 0) followed by the closed-form past
/// model for p = 1..p_max.
std::vector<SweepPoint> sweep_past_bic(const FeatureHistogram& hist, int p_max,
                                       PenaltyConvention penalty = PenaltyConvention::EstimatedParameters);

}  // namespace adrsig
