#include "adrsig/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace adrsig {

std::string_view to_string(PenaltyConvention c) noexcept {
  return c == PenaltyConvention::Uniform ? "uniform" : "estimated";
}

PenaltyConvention parse_penalty_convention(std::string_view name) {
  if (name == "estimated") return PenaltyConvention::EstimatedParameters;
  if (name == "uniform") return PenaltyConvention::Uniform;
  throw std::invalid_argument("unknown penalty convention '" + std::string(name) + "'");
}

int penalized_params(const FitResult& fit, PenaltyConvention convention) noexcept {
  if (convention == PenaltyConvention::EstimatedParameters && fit.spec.kind == ModelKind::NoAssociation) {
    return fit.n_params - 1;
  }
  return fit.n_params;
}

double bic(const FitResult& fit, PenaltyConvention convention) {
  if (fit.n_patients < 1) throw std::invalid_argument("bic: needs at least one patient");
  if (!std::isfinite(fit.loglik)) throw std::invalid_argument("bic: non-finite log-likelihood");
  return penalized_params(fit, convention) * std::log(static_cast<double>(fit.n_patients)) - 2.0 * fit.loglik;
}

std::vector<double> posteriors(std::span<const double> bics) {
  std::vector<double> out(bics.size());
  if (bics.empty()) return out;
  const double best = *std::min_element(bics.begin(), bics.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < bics.size(); ++i) {
    out[i] = std::exp(-0.5 * (bics[i] - best));
    sum += out[i];
  }
  for (auto& w : out) w /= sum;
  return out;
}

std::size_t ModelComparison::null_index() const {
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (fits[i].spec.kind == ModelKind::NoAssociation) return i;
  }
  throw std::logic_error("model comparison without a null model");
}

ModelComparison compare_models(std::vector<FitResult> fits, PenaltyConvention penalty) {
  ModelComparison cmp;
  cmp.fits = std::move(fits);
  cmp.penalty = penalty;
  (void)cmp.null_index();
  cmp.bic.reserve(cmp.fits.size());
  for (const auto& fit : cmp.fits) cmp.bic.push_back(bic(fit, penalty));
  cmp.posterior = posteriors(cmp.bic);
  return cmp;
}

std::size_t select_by_bic(const ModelComparison& cmp) {
  return static_cast<std::size_t>(std::min_element(cmp.bic.begin(), cmp.bic.end()) - cmp.bic.begin());
}

std::size_t select_by_max_likelihood(const ModelComparison& cmp) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& fit : cmp.fits) best = std::max(best, fit.loglik);
  const double slack = kLoglikTieTolerance * std::max(1.0, std::abs(best));

  std::vector<std::size_t> order(cmp.fits.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return penalized_params(cmp.fits[a], cmp.penalty) < penalized_params(cmp.fits[b], cmp.penalty);
  });
  for (auto i : order) {
    if (cmp.fits[i].loglik >= best - slack) return i;
  }
  return order.front();
}

SignalReport decide(const ModelComparison& cmp, PairLabel pair, double threshold) {
  SignalReport report;
  report.pair = std::move(pair);
  const auto null = cmp.null_index();
  report.null_posterior = cmp.posterior[null];
  report.decision_posterior = report.null_posterior < threshold;
  report.decision_maxlik = cmp.fits[select_by_max_likelihood(cmp)].spec.kind != ModelKind::NoAssociation;
  report.best_model = cmp.fits[select_by_bic(cmp)];
  report.rank_key = report.null_posterior;
  report.comparison = cmp;
  return report;
}

std::vector<std::size_t> rank_order(std::span<const SignalReport> reports) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].rank_key < reports[b].rank_key; });
  return order;
}

std::vector<SignalReport> rank_pairs(std::vector<SignalReport> reports) {
  std::vector<SignalReport> out;
  out.reserve(reports.size());
  for (auto i : rank_order(reports)) out.push_back(std::move(reports[i]));
  return out;
}

std::vector<SweepPoint> sweep_past_bic(const FeatureHistogram& hist, int p_max, PenaltyConvention penalty) {
  const auto profile = past_profile(hist, p_max);
  std::vector<SweepPoint> sweep;
  sweep.reserve(profile.size() + 1);
  sweep.push_back({0, bic(fit_current_use(hist), penalty)});
  FitResult past;
  past.spec.kind = ModelKind::Past;
  past.spec.horizon = hist.horizon();
  past.n_params = param_count(ModelKind::Past) + 2;
  past.n_patients = hist.n_patients();
  for (const auto& point : profile) {
    past.spec.window = point.p;
    past.params = point.params;
    past.loglik = point.loglik;
    sweep.push_back({point.p, bic(past, penalty)});
  }
  return sweep;
}

}  // namespace adrsig
