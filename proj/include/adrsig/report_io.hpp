#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "adrsig/estimation.hpp"
#include "adrsig/harness.hpp"
#include "adrsig/selection.hpp"

namespace adrsig {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_real(double value);
/// format_real, or "n/a" when empty.
std::string format_optional(const std::optional<double>& value);

nlohmann::json to_json(const ModelSpec& spec);
nlohmann::json to_json(const FitResult& fit);
/// Includes every candidate's BIC and posterior.
nlohmann::json to_json(const SignalReport& report);
nlohmann::json to_json(const BinaryMetrics& metrics);

/// Settings a fit depends on: optimizer options, penalty convention, and what
/// N in the BIC counts.
nlohmann::json fit_metadata(const SimplexConfig& simplex, PenaltyConvention penalty);

/// One line per fit: kind, params, loglik, BIC. Header first.
void write_fits_csv(std::ostream& out, const std::vector<FitResult>& fits, PenaltyConvention penalty);

/// Columns `p,bic`, the p = 0 row first.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep);

/// Rows are selected kinds, columns the true-model labels that were run.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& matrix, const std::vector<std::size_t>& true_models);

/// Header plus one row per (setting, rule).
void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_row(std::ostream& out, const GridSetting& setting, const BinaryMetrics& metrics,
                           SelectionRule rule);

}  // namespace adrsig
