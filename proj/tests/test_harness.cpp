#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "adrsig/harness.hpp"

using namespace adrsig;

namespace {

ModelKind fit_side(std::size_t true_model) { return true_model_catalog(100).at(true_model).spec.kind; }

GridConfig small_grid() {
  GridConfig g;
  g.prob_exposed = {0.5};
  g.pi0 = {1e-3};
  g.pi1 = {0.3};
  g.n_patients = 150;
  g.horizon = 30;
  g.reps = 2;
  return g;
}

}  // namespace

TEST_CASE("true-model catalog") {
  const auto cat = true_model_catalog(100);
  REQUIRE(cat.size() == kTrueModelCount);
  std::set<std::string> labels;
  std::set<ModelKind> kinds;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    CHECK_NOTHROW(validate(cat[i].spec));
    CHECK(cat[i].spec.horizon == 100);
    CHECK(true_model_index(cat[i].label) == i);
    CHECK(true_model_label(i) == cat[i].label);
    labels.insert(cat[i].label);
    kinds.insert(cat[i].spec.kind);
  }
  CHECK(labels.size() == 12);
  CHECK(kinds.size() == 8);
  CHECK(cat[3].spec.rho == 0.5);
  CHECK(cat[5].spec.mu == 5.0);
  CHECK(cat[8].spec.mu == 10.0);
  CHECK(cat[8].spec.sigma == 2.0);
  CHECK(cat[8].spec.rho == 1.0);
  CHECK(cat[9].spec.rho == 0.25);
  CHECK(cat[9].spec.kappa == 50.0);
  CHECK(cat[11].spec.window == 10);
  CHECK_THROWS_AS(true_model_index("quadratic"), std::invalid_argument);
}

TEST_CASE("binary_metrics") {
  const auto perfect = binary_metrics({true, true, true}, {true, true, true});
  CHECK(*perfect.precision == 1.0);
  CHECK(*perfect.recall == 1.0);
  CHECK(*perfect.f1 == 1.0);

  const auto m = metrics_from_counts(1, 0, 1, 3);
  CHECK(*m.precision == 0.5);
  CHECK(*m.recall == 0.25);
  CHECK(*m.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto none = binary_metrics({true, false, true}, {false, false, false});
  CHECK_FALSE(none.precision.has_value());
  CHECK(*none.recall == 0.0);
  CHECK_FALSE(none.f1.has_value());

  CHECK_THROWS_AS(binary_metrics({true}, {true, false}), std::invalid_argument);

  std::mt19937_64 rng(1);
  std::bernoulli_distribution b(0.4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<bool> truth, dec;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < n; ++i) {
      truth.push_back(b(rng));
      dec.push_back(b(rng));
    }
    const auto r = binary_metrics(truth, dec);
    const int positives = static_cast<int>(std::count(truth.begin(), truth.end(), true));
    CHECK(r.runs() == n);
    CHECK(r.tp + r.fn == positives);
    CHECK(r.tn + r.fp == n - positives);
  }
}

TEST_CASE("selection rule names") {
  CHECK(parse_selection_rule("bic") == SelectionRule::Bic);
  CHECK(parse_selection_rule("maxlik") == SelectionRule::MaxLikelihood);
  CHECK(to_string(SelectionRule::MaxLikelihood) == "maxlik");
  CHECK_THROWS_AS(parse_selection_rule("aic"), std::invalid_argument);
}

TEST_CASE("grid config") {
  std::istringstream in("mu_E = 0.5, 0.1\npi0 = 1e-3\npi1 = .1 .3\nN = 200\nT = 40\ndelta = 3\nreps = 4\n");
  const auto g = parse_grid_config(in);
  CHECK(g.prob_exposed == std::vector<double>{0.5, 0.1});
  CHECK(g.pi1 == std::vector<double>{0.1, 0.3});
  CHECK(g.n_patients == 200);
  CHECK(g.horizon == 40);
  CHECK(g.mean_duration == 3.0);
  CHECK(g.reps == 4);
  const auto s = grid_settings(g);
  REQUIRE(s.size() == 4);
  CHECK(s[1].prob_exposed == 0.5);
  CHECK(s[1].pi1 == 0.3);
  CHECK(s[2].prob_exposed == 0.1);
  CHECK(s[3].index == 3);

  const auto table = grid_settings(GridConfig{});
  CHECK(table.size() == 24);

  std::istringstream bad("mu_E = 0.5\ncolour = 1\n");
  CHECK_THROWS_WITH_AS(parse_grid_config(bad), doctest::Contains("line 2"), std::invalid_argument);
  std::istringstream short_t("T = 5\n");
  CHECK_THROWS_AS(parse_grid_config(short_t), std::invalid_argument);
}

TEST_CASE("run_grid: column sums, max-likelihood optimality, determinism") {
  const auto grid = small_grid();
  ExperimentOptions opt;
  opt.seed = 5;
  opt.threads = 1;
  const auto a = run_grid(grid, opt);
  REQUIRE(a.size() == 1);
  const auto& res = a.front();
  CHECK(res.failures.empty());
  CHECK(res.runs.size() == 12 * 2);
  for (auto rule : {SelectionRule::Bic, SelectionRule::MaxLikelihood}) {
    const auto cm = res.confusion(rule);
    for (std::size_t t = 0; t < kTrueModelCount; ++t) CHECK(cm.column_sum(t) == grid.reps);
    CHECK(res.metrics(rule).runs() == 24);
  }

  opt.threads = 3;
  const auto b = run_grid(grid, opt);
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    CHECK(b.front().runs[i].selected_bic == res.runs[i].selected_bic);
    CHECK(b.front().runs[i].selected_maxlik == res.runs[i].selected_maxlik);
    CHECK(b.front().runs[i].null_posterior == res.runs[i].null_posterior);
  }

  // A single setting run on its own reuses the full-grid seeds.
  GridConfig two = grid;
  two.pi1 = {0.1, 0.3};
  opt.threads = 1;
  opt.true_models = {1, 10};
  const auto full = run_grid(two, opt);
  const auto alone = run_setting(two, grid_settings(two)[1], opt);
  REQUIRE(alone.runs.size() == 4);
  for (std::size_t i = 0; i < alone.runs.size(); ++i) {
    CHECK(alone.runs[i].null_posterior == full[1].runs[i].null_posterior);
  }
  const auto cm = alone.confusion(SelectionRule::Bic);
  CHECK(cm.column_sum(1) == 2);
  CHECK(cm.column_sum(0) == 0);
}

TEST_CASE("run_once: max-likelihood pick dominates every candidate") {
  SimulationConfig cfg;
  cfg.n_patients = 200;
  cfg.horizon = 40;
  cfg.prob_exposed = 0.3;
  cfg.pi0 = 1e-3;
  cfg.pi1 = 0.2;
  const auto cat = true_model_catalog(40);
  for (std::size_t m = 0; m < cat.size(); m += 3) {
    cfg.model = cat[m].spec;
    cfg.seed = run_seed(1, 0, m, 0);
    const FeatureHistogram h(simulate_cohort(cfg));
    SimplexConfig sc;
    sc.seed = derive_seed(cfg.seed, {0x5eedULL});
    const auto cmp = compare_models(fit_models(kAllModelKinds, h, sc));
    const auto pick = select_by_max_likelihood(cmp);
    for (const auto& f : cmp.fits) {
      CHECK(cmp.fits[pick].loglik >= f.loglik - kLoglikTieTolerance * std::max(1.0, std::abs(f.loglik)));
    }
    const auto out = run_once(cfg, SimplexConfig{}, PenaltyConvention::EstimatedParameters, 0.5);
    CHECK(out.ok);
    CHECK(out.selected_maxlik == cmp.fits[pick].spec.kind);
    CHECK(out.signal_posterior == (out.null_posterior < 0.5));
  }
}

TEST_CASE("run_once records failures instead of throwing") {
  SimulationConfig cfg;
  cfg.prob_exposed = 2.0;
  const auto out = run_once(cfg, SimplexConfig{}, PenaltyConvention::EstimatedParameters, 0.5);
  CHECK_FALSE(out.ok);
  CHECK_FALSE(out.error.empty());
}

TEST_CASE("perfect classifier gives a diagonal confusion matrix") {
  SettingResult r;
  r.reps = 3;
  for (std::size_t t = 0; t < kTrueModelCount; ++t) r.true_models.push_back(t);
  for (std::size_t t = 0; t < kTrueModelCount; ++t) {
    for (int k = 0; k < r.reps; ++k) {
      RunOutcome o;
      o.ok = true;
      o.selected_bic = o.selected_maxlik = fit_side(t);
      o.signal_posterior = o.signal_maxlik = t != 0;
      r.runs.push_back(o);
    }
  }
  const auto cm = r.confusion(SelectionRule::Bic);
  for (std::size_t t = 0; t < kTrueModelCount; ++t) {
    CHECK(cm.at(fit_side(t), t) == 3);
    CHECK(cm.column_sum(t) == 3);
  }
  const auto m = r.metrics(SelectionRule::Bic);
  CHECK(*m.precision == 1.0);
  CHECK(*m.recall == 1.0);
  CHECK(m.tn == 3);
}
