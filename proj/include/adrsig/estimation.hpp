#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "adrsig/cohort.hpp"
#include "adrsig/nelder_mead.hpp"
#include "adrsig/risk_models.hpp"

namespace adrsig {

/// ADR probabilities at minimal (pi0) and maximal (pi1) risk.
struct ModelParams {
  double pi0 = 0.0;
  double pi1 = 0.0;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// P(Y(t)=1 | history) = (pi1 - pi0) * risk + pi0.
constexpr double adr_probability(const ModelParams& p, double risk) noexcept {
  return (p.pi1 - p.pi0) * risk + p.pi0;
}

/// Counts of ADR / non-ADR cells per distinct exposure-feature tuple. A
/// sufficient statistic for every in-scope risk function.
struct HistogramCell {
  ExposureFeatures features;
  std::uint64_t with_adr = 0;
  std::uint64_t without_adr = 0;
};

class FeatureHistogram {
 public:
  explicit FeatureHistogram(const Cohort& cohort);

  /// Merges cells the given kind cannot tell apart (see risk_relevant).
  FeatureHistogram project(ModelKind kind) const;

  std::span<const HistogramCell> cells() const noexcept { return cells_; }
  std::uint64_t total_cells() const noexcept { return total_cells_; }
  std::uint64_t total_adr() const noexcept { return total_adr_; }
  std::size_t n_patients() const noexcept { return n_patients_; }
  int horizon() const noexcept { return horizon_; }  // max_k T_k

  /// Cell counts with the exposure criterion "exposed within the last p
  /// points" (p = 0: exposed now).
  ContingencyCounts window_counts(int p) const noexcept;

 private:
  FeatureHistogram() = default;
  std::vector<HistogramCell> cells_;
  std::uint64_t total_cells_ = 0;
  std::uint64_t total_adr_ = 0;
  std::size_t n_patients_ = 0;
  int horizon_ = 0;
};

/// Exposure-model log-likelihood summed over histogram cells. Each logged
/// probability is floored at kProbabilityFloor; a zero count contributes 0.
inline constexpr double kProbabilityFloor = 1e-12;
double log_likelihood(const RiskFunction& risk, const ModelParams& params, const FeatureHistogram& hist);
double log_likelihood(const ModelSpec& spec, const ModelParams& params, const FeatureHistogram& hist);

enum class FitMethod : std::uint8_t { ClosedForm, Simplex };
std::string_view to_string(FitMethod method) noexcept;

struct FitResult {
  ModelSpec spec;  // carries the fitted risk parameters
  ModelParams params;
  double loglik = 0.0;
  int n_params = 0;  // param_count(kind) + 2
  std::size_t n_patients = 0;
  FitMethod method = FitMethod::ClosedForm;
  bool converged = true;
  int starts = 0;       // simplex starts tried (0 for closed forms)
  int evaluations = 0;  // objective evaluations across all starts
};

struct SimplexConfig {
  SimplexOptions simplex{};
  int starts = 5;  // one moment-based start plus (starts - 1) jittered copies
  double jitter = 1.0;  // half-width of the uniform jitter in transformed coordinates
  std::uint64_t seed = 0;
  // Adds a start at the nested null optimum (pi0 = pi1 = pooled rate) for
  // kinds with a risk function, so the fit can never fall below the null.
  bool nested_start = true;
};

/// Binomial profile term k log(k/n) + (n-k) log(1-k/n), with 0 log 0 = 0.
double binomial_loglik(std::uint64_t events, std::uint64_t trials) noexcept;

/// 2x2 closed-form log-likelihood at the count MLE.
double contingency_loglik(const ContingencyCounts& counts) noexcept;

/// Count MLE (A/(A+B), C/(C+D)); an empty margin is pinned to the pooled rate.
ModelParams contingency_mle(const ContingencyCounts& counts) noexcept;

FitResult fit_null(const FeatureHistogram& hist);
FitResult fit_current_use(const FeatureHistogram& hist);
/// Exhaustive scan over p in {1..T-1}; ties go to the smaller p.
FitResult fit_past(const FeatureHistogram& hist);

struct PastProfilePoint {
  int p = 0;
  ContingencyCounts counts;
  ModelParams params;
  double loglik = 0.0;
};
/// Closed-form profile for p = 1..p_max. Throws std::out_of_range unless
/// 1 <= p_max <= T-1.
std::vector<PastProfilePoint> past_profile(const FeatureHistogram& hist, int p_max);

/// Simplex maximisation of the log-likelihood over (pi0, pi1, continuous risk
/// parameters), holding `model.window` fixed. Parameters are searched as
/// logit(pi) and log(theta). For NoAssociation only pi0 is free.
FitResult fit_numeric(const ModelSpec& model, const FeatureHistogram& hist, const SimplexConfig& config = {});
FitResult fit_numeric(ModelKind kind, const FeatureHistogram& hist, const SimplexConfig& config = {});

/// Closed form for NoAssociation / CurrentUse / Past, simplex otherwise.
FitResult fit_model(ModelKind kind, const FeatureHistogram& hist, const SimplexConfig& config = {});
std::vector<FitResult> fit_models(std::span<const ModelKind> kinds, const FeatureHistogram& hist,
                                  const SimplexConfig& config = {});

inline FitResult fit_model(ModelKind kind, const Cohort& cohort, const SimplexConfig& config = {}) {
  return fit_model(kind, FeatureHistogram(cohort), config);
}

namespace detail {
/// Parameter transform used by the simplex search: logit for pi0, pi1; log
/// for positive risk parameters (clamped to [1e-8, 1e8] on the way back).
struct Reparameterization {
  ModelSpec base;
  bool pi1_free = true;

  std::size_t dimension() const noexcept;
  std::vector<double> to_search(const ModelSpec& spec, const ModelParams& params) const;
  void from_search(std::span<const double> u, ModelSpec& spec, ModelParams& params) const noexcept;
};
}  // namespace detail

}  // namespace adrsig
