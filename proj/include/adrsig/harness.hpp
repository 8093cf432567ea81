#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adrsig/estimation.hpp"
#include "adrsig/risk_models.hpp"
#include "adrsig/selection.hpp"
#include "adrsig/simulator.hpp"

namespace adrsig {

/// A generating configuration of the simulation study.
struct TrueModel {
  std::string label;
  ModelSpec spec;
};

inline constexpr std::size_t kTrueModelCount = 12;
inline constexpr std::size_t kCandidateCount = kAllModelKinds.size();

/// null, current use, withdrawal rho 1 and 1/2, delayed (2,2) and (5,2),
/// decaying rho 1 and 1/2, delayed+decaying (10,2,1), long-term (1/4,50),
/// past p 5 and 10. Specs carry `horizon`.
std::vector<TrueModel> true_model_catalog(int horizon);

/// Index into the catalog by label; throws std::invalid_argument.
std::size_t true_model_index(std::string_view label);
std::string_view true_model_label(std::size_t index);

enum class SelectionRule { Bic, MaxLikelihood };
std::string_view to_string(SelectionRule rule) noexcept;
/// "bic" (alias "posterior") or "maxlik" (alias "max_likelihood").
SelectionRule parse_selection_rule(std::string_view name);

/// Selected kind (rows) by true model (columns).
struct ConfusionMatrix {
  std::array<std::array<int, kTrueModelCount>, kCandidateCount> counts{};
  int reps = 0;

  int& at(ModelKind selected, std::size_t true_model) { return counts[index_of(selected)][true_model]; }
  int at(ModelKind selected, std::size_t true_model) const { return counts[index_of(selected)][true_model]; }
  int column_sum(std::size_t true_model) const;
};

struct BinaryMetrics {
  int tp = 0, tn = 0, fp = 0, fn = 0;
  std::optional<double> precision;  // empty when undefined
  std::optional<double> recall;
  std::optional<double> f1;

  int runs() const noexcept { return tp + tn + fp + fn; }
};

/// Counts plus derived rates; F1 is the harmonic mean of precision and
/// recall and is undefined when either is, or when both are 0. Throws
/// std::invalid_argument on a length mismatch.
BinaryMetrics binary_metrics(const std::vector<bool>& truth, const std::vector<bool>& decisions);
BinaryMetrics metrics_from_counts(int tp, int tn, int fp, int fn);

/// Table-style settings grid. Settings enumerate prob_exposed (outermost),
/// pi0, pi1 (innermost).
struct GridConfig {
  std::vector<double> prob_exposed{0.01, 0.1, 0.5};
  std::vector<double> pi0{1e-4, 1e-3};
  std::vector<double> pi1{0.01, 0.1, 0.2, 0.3};
  int n_patients = 1000;
  int horizon = 100;
  double mean_duration = 5.0;
  int reps = 20;
};

void validate(const GridConfig& grid);

/// Keys: mu_E, pi0, pi1 (lists), N, T, delta, reps. Missing keys keep their
/// defaults; unknown keys are errors.
GridConfig parse_grid_config(std::istream& in);

struct GridSetting {
  std::size_t index = 0;
  double prob_exposed = 0.0;
  double pi0 = 0.0;
  double pi1 = 0.0;
};

std::vector<GridSetting> grid_settings(const GridConfig& grid);

struct ExperimentOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
  SimplexConfig simplex{};
  PenaltyConvention penalty = PenaltyConvention::EstimatedParameters;
  double threshold = kDefaultPosteriorThreshold;
  /// Catalog indices to simulate; empty = all twelve.
  std::vector<std::size_t> true_models;
};

/// Outcome of one simulated cohort scored by both rules.
struct RunOutcome {
  bool ok = false;
  std::string error;
  ModelKind selected_bic = ModelKind::NoAssociation;
  ModelKind selected_maxlik = ModelKind::NoAssociation;
  bool signal_posterior = false;
  bool signal_maxlik = false;
  double null_posterior = 1.0;
};

/// Seed for (setting, true model, rep) under a base seed.
std::uint64_t run_seed(std::uint64_t base, std::size_t setting, std::size_t true_model, std::size_t rep) noexcept;

/// Simulates one cohort from `config`, fits every candidate and scores it.
/// Fit errors are caught and returned in `error`.
RunOutcome run_once(const SimulationConfig& config, const SimplexConfig& simplex,
                    PenaltyConvention penalty, double threshold);

struct CellDiagnostic {
  std::size_t true_model = 0;
  int rep = 0;
  std::string message;
};

struct SettingResult {
  GridSetting setting;
  int reps = 0;
  std::vector<std::size_t> true_models;  // catalog indices that were run
  /// runs[i * reps + r] for true model true_models[i], rep r.
  std::vector<RunOutcome> runs;
  std::vector<CellDiagnostic> failures;

  ConfusionMatrix confusion(SelectionRule rule) const;
  BinaryMetrics metrics(SelectionRule rule) const;
};

/// Runs every (setting, true model, rep) cell on a worker pool. Results are
/// stored by index, so output does not depend on the thread count.
std::vector<SettingResult> run_grid(const GridConfig& grid, const ExperimentOptions& options);

/// Same, for a single setting of the grid's fixed dimensions.
SettingResult run_setting(const GridConfig& grid, const GridSetting& setting, const ExperimentOptions& options);

}  // namespace adrsig
