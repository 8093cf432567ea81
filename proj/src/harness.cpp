#include "adrsig/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <thread>

#include "adrsig/key_value.hpp"

namespace adrsig {

namespace {

ModelSpec make_spec(ModelKind kind, int horizon) {
  ModelSpec s;
  s.kind = kind;
  s.horizon = horizon;
  return s;
}

const std::array<std::string_view, kTrueModelCount> kLabels{
    "null",         "current_use", "withdrawal_1",        "withdrawal_0.5",
    "delayed_2_2",  "delayed_5_2", "decaying_1",          "decaying_0.5",
    "delayed_decaying_10_2_1",     "long_term_0.25_50",   "past_5",
    "past_10",
};

}  // namespace

std::vector<TrueModel> true_model_catalog(int horizon) {
  std::vector<TrueModel> out;
  out.reserve(kTrueModelCount);
  auto add = [&](ModelSpec spec) { out.push_back({std::string(kLabels[out.size()]), spec}); };

  add(make_spec(ModelKind::NoAssociation, horizon));
  add(make_spec(ModelKind::CurrentUse, horizon));
  for (double rho : {1.0, 0.5}) {
    auto s = make_spec(ModelKind::Withdrawal, horizon);
    s.rho = rho;
    add(s);
  }
  for (double mu : {2.0, 5.0}) {
    auto s = make_spec(ModelKind::Delayed, horizon);
    s.mu = mu;
    s.sigma = 2.0;
    add(s);
  }
  for (double rho : {1.0, 0.5}) {
    auto s = make_spec(ModelKind::Decaying, horizon);
    s.rho = rho;
    add(s);
  }
  {
    auto s = make_spec(ModelKind::DelayedDecaying, horizon);
    s.mu = 10.0;
    s.sigma = 2.0;
    s.rho = 1.0;
    add(s);
  }
  {
    auto s = make_spec(ModelKind::LongTerm, horizon);
    s.rho = 0.25;
    s.kappa = 50.0;
    add(s);
  }
  for (int p : {5, 10}) {
    auto s = make_spec(ModelKind::Past, horizon);
    s.window = p;
    add(s);
  }
  return out;
}

std::size_t true_model_index(std::string_view label) {
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (kLabels[i] == label) return i;
  }
  throw std::invalid_argument("unknown true model '" + std::string(label) + "'");
}

std::string_view true_model_label(std::size_t index) { return kLabels.at(index); }

std::string_view to_string(SelectionRule rule) noexcept {
  return rule == SelectionRule::Bic ? "bic" : "maxlik";
}

SelectionRule parse_selection_rule(std::string_view name) {
  if (name == "bic" || name == "posterior") return SelectionRule::Bic;
  if (name == "maxlik" || name == "max_likelihood") return SelectionRule::MaxLikelihood;
  throw std::invalid_argument("unknown selection rule '" + std::string(name) + "'");
}

int ConfusionMatrix::column_sum(std::size_t true_model) const {
  int sum = 0;
  for (const auto& row : counts) sum += row.at(true_model);
  return sum;
}

BinaryMetrics metrics_from_counts(int tp, int tn, int fp, int fn) {
  BinaryMetrics m{tp, tn, fp, fn, {}, {}, {}};
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / (tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / (tp + fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

BinaryMetrics binary_metrics(const std::vector<bool>& truth, const std::vector<bool>& decisions) {
  if (truth.size() != decisions.size()) {
    throw std::invalid_argument("binary_metrics: truth and decisions differ in length");
  }
  int tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      (decisions[i] ? tp : fn) += 1;
    } else {
      (decisions[i] ? fp : tn) += 1;
    }
  }
  return metrics_from_counts(tp, tn, fp, fn);
}

void validate(const GridConfig& g) {
  if (g.prob_exposed.empty() || g.pi0.empty() || g.pi1.empty()) {
    throw std::invalid_argument("grid: mu_E, pi0 and pi1 need at least one value");
  }
  if (g.reps < 1) throw std::invalid_argument("grid: reps must be >= 1");
  for (double mu : g.prob_exposed) (void)derive_markov_params(mu, g.mean_duration, g.horizon);
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!std::all_of(g.pi0.begin(), g.pi0.end(), in_unit) || !std::all_of(g.pi1.begin(), g.pi1.end(), in_unit)) {
    throw std::invalid_argument("grid: pi0 and pi1 must lie in [0,1]");
  }
  if (g.n_patients < 1) throw std::invalid_argument("grid: N must be >= 1");
  // The catalog includes Past(p=10) and the delayed+decaying normalisation.
  if (g.horizon < 11) throw std::invalid_argument("grid: T must be >= 11 for the true-model catalog");
}

GridConfig parse_grid_config(std::istream& in) {
  GridConfig g;
  for (const auto& kv : parse_key_values(in)) {
    try {
      if (kv.key == "mu_E" || kv.key == "prob_exposed") {
        g.prob_exposed = parse_real_list(kv.value);
      } else if (kv.key == "pi0") {
        g.pi0 = parse_real_list(kv.value);
      } else if (kv.key == "pi1") {
        g.pi1 = parse_real_list(kv.value);
      } else if (kv.key == "N" || kv.key == "n_patients") {
        g.n_patients = static_cast<int>(parse_integer(kv.value));
      } else if (kv.key == "T" || kv.key == "horizon") {
        g.horizon = static_cast<int>(parse_integer(kv.value));
      } else if (kv.key == "delta" || kv.key == "mean_duration") {
        g.mean_duration = parse_real(kv.value);
      } else if (kv.key == "reps") {
        g.reps = static_cast<int>(parse_integer(kv.value));
      } else {
        throw std::invalid_argument("unknown grid key '" + kv.key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  validate(g);
  return g;
}

std::vector<GridSetting> grid_settings(const GridConfig& grid) {
  std::vector<GridSetting> out;
  for (double mu : grid.prob_exposed) {
    for (double p0 : grid.pi0) {
      for (double p1 : grid.pi1) out.push_back({out.size(), mu, p0, p1});
    }
  }
  return out;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t setting, std::size_t true_model, std::size_t rep) noexcept {
  return derive_seed(base, {setting, true_model, rep});
}

RunOutcome run_once(const SimulationConfig& config, const SimplexConfig& simplex, PenaltyConvention penalty,
                    double threshold) {
  RunOutcome out;
  try {
    const FeatureHistogram hist(simulate_cohort(config));
    auto cfg = simplex;
    cfg.seed = derive_seed(config.seed, {0x5eedULL});
    const auto cmp = compare_models(fit_models(kAllModelKinds, hist, cfg), penalty);
    const auto report = decide(cmp, {}, threshold);
    out.selected_bic = cmp.fits[select_by_bic(cmp)].spec.kind;
    out.selected_maxlik = cmp.fits[select_by_max_likelihood(cmp)].spec.kind;
    out.signal_posterior = report.decision_posterior;
    out.signal_maxlik = report.decision_maxlik;
    out.null_posterior = report.null_posterior;
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

ConfusionMatrix SettingResult::confusion(SelectionRule rule) const {
  ConfusionMatrix m;
  m.reps = reps;
  for (std::size_t i = 0; i < true_models.size(); ++i) {
    for (int r = 0; r < reps; ++r) {
      const auto& run = runs[i * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      if (!run.ok) continue;
      m.at(rule == SelectionRule::Bic ? run.selected_bic : run.selected_maxlik, true_models[i]) += 1;
    }
  }
  return m;
}

BinaryMetrics SettingResult::metrics(SelectionRule rule) const {
  std::vector<bool> truth, decisions;
  for (std::size_t i = 0; i < true_models.size(); ++i) {
    for (int r = 0; r < reps; ++r) {
      const auto& run = runs[i * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      if (!run.ok) continue;
      truth.push_back(true_models[i] != 0);
      decisions.push_back(rule == SelectionRule::Bic ? run.signal_posterior : run.signal_maxlik);
    }
  }
  return binary_metrics(truth, decisions);
}

namespace {

std::vector<SettingResult> run_settings(const GridConfig& grid, const std::vector<GridSetting>& settings,
                                        const ExperimentOptions& options) {
  validate(grid);
  const auto catalog = true_model_catalog(grid.horizon);

  std::vector<std::size_t> models = options.true_models;
  if (models.empty()) {
    for (std::size_t i = 0; i < kTrueModelCount; ++i) models.push_back(i);
  }
  for (auto m : models) {
    if (m >= kTrueModelCount) throw std::invalid_argument("true model index out of range");
  }

  const std::size_t reps = static_cast<std::size_t>(grid.reps);
  const std::size_t per_setting = models.size() * reps;
  std::vector<SettingResult> results(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    results[s].setting = settings[s];
    results[s].reps = grid.reps;
    results[s].true_models = models;
    results[s].runs.resize(per_setting);
  }

  const std::size_t total = settings.size() * per_setting;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t s = job / per_setting;
      const std::size_t within = job % per_setting;
      const std::size_t m = within / reps;
      const std::size_t r = within % reps;
      SimulationConfig cfg;
      cfg.n_patients = grid.n_patients;
      cfg.horizon = grid.horizon;
      cfg.prob_exposed = settings[s].prob_exposed;
      cfg.mean_duration = grid.mean_duration;
      cfg.model = catalog[models[m]].spec;
      cfg.pi0 = settings[s].pi0;
      cfg.pi1 = settings[s].pi1;
      cfg.seed = run_seed(options.seed, settings[s].index, models[m], r);
      results[s].runs[within] = run_once(cfg, options.simplex, options.penalty, options.threshold);
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& res : results) {
    for (std::size_t i = 0; i < res.runs.size(); ++i) {
      if (res.runs[i].ok) continue;
      res.failures.push_back({res.true_models[i / reps], static_cast<int>(i % reps), res.runs[i].error});
    }
  }
  return results;
}

}  // namespace

std::vector<SettingResult> run_grid(const GridConfig& grid, const ExperimentOptions& options) {
  return run_settings(grid, grid_settings(grid), options);
}

// Keeps the setting's own index, so its seeds match the full-grid run.
SettingResult run_setting(const GridConfig& grid, const GridSetting& setting, const ExperimentOptions& options) {
  GridConfig single = grid;
  single.prob_exposed = {setting.prob_exposed};
  single.pi0 = {setting.pi0};
  single.pi1 = {setting.pi1};
  return std::move(run_settings(single, {setting}, options).front());
}

}  // namespace adrsig
