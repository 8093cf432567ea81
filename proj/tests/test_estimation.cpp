#include <doctest.h>

#include <cmath>
#include <random>

#include "adrsig/estimation.hpp"
#include "adrsig/simulator.hpp"
#include "test_support.hpp"

using namespace adrsig;

namespace {

Cohort strong_cohort(ModelSpec model, std::uint64_t seed, double pi0 = 1e-4) {
  SimulationConfig cfg;
  cfg.prob_exposed = 0.5;
  cfg.model = model;
  cfg.pi0 = pi0;
  cfg.pi1 = 0.3;
  cfg.seed = seed;
  return simulate_cohort(cfg);
}

}  // namespace

TEST_CASE("histogram counts every cell once") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto c = oracle::random_cohort(rng, 30, 25);
    const FeatureHistogram h(c);
    std::uint64_t cells = 0, adr = 0;
    for (const auto& cell : h.cells()) {
      cells += cell.with_adr + cell.without_adr;
      adr += cell.with_adr;
    }
    CHECK(cells == c.total_cells());
    CHECK(h.total_cells() == c.total_cells());
    CHECK(adr == c.total_adr());
    CHECK(h.n_patients() == c.size());
    CHECK(h.horizon() == static_cast<int>(c.max_length()));
    for (int p = 0; p < h.horizon(); ++p) CHECK(h.window_counts(p) == detail::contingency_window(c, p));
  }
}

TEST_CASE("log_likelihood examples") {
  // Half the cells carry an ADR.
  const auto c = oracle::make_cohort({{"0110", "1010"}, {"1000", "0101"}});
  const FeatureHistogram h(c);
  ModelSpec null;
  CHECK(log_likelihood(null, {0.5, 0.5}, h) == doctest::Approx(8 * std::log(0.5)).epsilon(1e-14));

  std::mt19937_64 rng(2);
  for (auto kind : kAllModelKinds) {
    const auto s = oracle::random_spec(kind, h.horizon(), rng);
    CHECK(log_likelihood(s, {0.3, 0.3}, h) == doctest::Approx(log_likelihood(null, {0.3, 0.3}, h)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(log_likelihood(null, {1.5, 0.5}, h), std::invalid_argument);
}

TEST_CASE("histogram log-likelihood equals the per-cell sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    const auto c = oracle::random_cohort(rng, 20, 15);
    const FeatureHistogram h(c);
    for (auto kind : kAllModelKinds) {
      const auto s = oracle::random_spec(kind, std::max(2, h.horizon()), rng);
      if (s.kind == ModelKind::Past && s.window > h.horizon() - 1) continue;
      const ModelParams par{u(rng), u(rng)};
      const double want = oracle::loglik(s, par, c);
      CHECK(log_likelihood(s, par, h) == doctest::Approx(want).epsilon(1e-12));
      CHECK(std::abs(log_likelihood(s, par, h.project(kind)) - want) <= 1e-9);
    }
  }
}

TEST_CASE("log_likelihood floors boundary probabilities") {
  const auto c = oracle::make_cohort({{"11", "01"}});
  const FeatureHistogram h(c);
  ModelSpec cur;
  cur.kind = ModelKind::CurrentUse;
  const double v = log_likelihood(cur, {0.0, 0.0}, h);
  CHECK(v == doctest::Approx(std::log(kProbabilityFloor)).epsilon(1e-14));
  CHECK(log_likelihood(cur, {0.0, 1.0}, h) == doctest::Approx(std::log(kProbabilityFloor)).epsilon(1e-14));
}

TEST_CASE("fit_null examples") {
  const auto none = fit_null(FeatureHistogram(oracle::make_cohort({{"0101", "0000"}})));
  CHECK(none.params.pi0 == 0.0);
  CHECK(none.loglik == 0.0);

  const auto half = fit_null(FeatureHistogram(oracle::make_cohort({{"0000", "1001"}})));
  CHECK(half.params.pi0 == 0.5);
  CHECK(half.params.pi1 == 0.5);
  CHECK(half.loglik == doctest::Approx(4 * std::log(0.5)).epsilon(1e-14));
  CHECK(half.n_params == 2);
  CHECK(half.method == FitMethod::ClosedForm);

  const auto all = fit_null(FeatureHistogram(oracle::make_cohort({{"01", "11"}, {"1", "1"}})));
  CHECK(all.params.pi0 == 1.0);
  CHECK(all.loglik == 0.0);
}

TEST_CASE("fit_current_use examples") {
  // (a,b,c,d) = (1,1,1,3)
  const auto c = oracle::make_cohort({{"110000", "100100"}});
  REQUIRE(contingency_current(c) == ContingencyCounts{1, 1, 1, 3});
  const auto f = fit_current_use(FeatureHistogram(c));
  CHECK(f.params.pi1 == 0.5);
  CHECK(f.params.pi0 == 0.25);
  CHECK(f.loglik == doctest::Approx(2 * std::log(0.5) + std::log(0.25) + 3 * std::log(0.75)).epsilon(1e-14));

  const auto never = fit_current_use(FeatureHistogram(oracle::make_cohort({{"0000", "0100"}})));
  CHECK(never.params.pi0 == 0.25);
  CHECK(never.params.pi1 == 0.25);

  const auto sep = fit_current_use(FeatureHistogram(oracle::make_cohort({{"1100", "1100"}})));
  CHECK(sep.params.pi1 == 1.0);
  CHECK(sep.params.pi0 == 0.0);
  CHECK(sep.loglik == 0.0);
}

TEST_CASE("contingency_mle pins an empty margin") {
  const auto p = contingency_mle({0, 0, 2, 6});
  CHECK(p.pi0 == 0.25);
  CHECK(p.pi1 == 0.25);
  CHECK(binomial_loglik(0, 0) == 0.0);
  CHECK(binomial_loglik(3, 3) == 0.0);
}

TEST_CASE("fit_past against brute force over p and a probability grid") {
  const auto c = oracle::make_cohort({{"1000", "0010"}});
  const auto f = fit_past(FeatureHistogram(c));
  CHECK(f.spec.window == 1);
  CHECK(f.loglik == doctest::Approx(2 * std::log(0.5)).epsilon(1e-14));

  double grid_best = -1e300;
  int grid_p = 0;
  for (int p = 1; p <= 3; ++p) {
    ModelSpec s;
    s.kind = ModelKind::Past;
    s.window = p;
    for (int i = 0; i <= 60; ++i) {
      for (int j = 0; j <= 60; ++j) {
        const double v = oracle::loglik(s, {i / 60.0, j / 60.0}, c);
        if (v > grid_best + 1e-12) {
          grid_best = v;
          grid_p = p;
        }
      }
    }
  }
  CHECK(grid_p == f.spec.window);
  CHECK(f.loglik >= grid_best - 1e-9);

  // Random cohorts: profile maximum equals the best per-p closed form.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rc = oracle::random_cohort(rng, 10, 12);
    if (rc.max_length() < 2) continue;
    const FeatureHistogram h(rc);
    const auto fit = fit_past(h);
    double best = -1e300;
    int best_p = 0;
    for (int p = 1; p + 1 <= static_cast<int>(rc.max_length()); ++p) {
      const double v = contingency_loglik(oracle::window_counts(rc, p));
      if (v > best) {
        best = v;
        best_p = p;
      }
    }
    CHECK(fit.spec.window == best_p);
    CHECK(fit.loglik == doctest::Approx(best).epsilon(1e-13));
    // The closed-form parameters attain the profile value under the general likelihood.
    CHECK(log_likelihood(fit.spec, fit.params, h) == doctest::Approx(fit.loglik).epsilon(1e-10));
  }
}

TEST_CASE("fit_past tie-break and range") {
  const auto flat = fit_past(FeatureHistogram(oracle::make_cohort({{"10100", "00000"}})));
  CHECK(flat.spec.window == 1);
  CHECK(flat.loglik == 0.0);
  CHECK_THROWS(fit_past(FeatureHistogram(oracle::make_cohort({{"1", "0"}}))));
  const FeatureHistogram h(oracle::make_cohort({{"1000", "0010"}}));
  CHECK_THROWS_AS(past_profile(h, 0), std::out_of_range);
  CHECK_THROWS_AS(past_profile(h, 4), std::out_of_range);
  CHECK(past_profile(h, 3).size() == 3);
}

TEST_CASE("fit_past recovers the window of a strong past-use signal") {
  ModelSpec truth;
  truth.kind = ModelKind::Past;
  truth.window = 5;
  const auto f = fit_past(FeatureHistogram(strong_cohort(truth, 17)));
  CHECK(f.spec.window == 5);
}

TEST_CASE("fit_numeric examples") {
  ModelSpec truth;
  truth.kind = ModelKind::Decaying;
  truth.rho = 1.0;
  truth.horizon = 100;
  const FeatureHistogram h(strong_cohort(truth, 23, 1e-3));
  const auto f = fit_numeric(ModelKind::Decaying, h);
  CHECK(f.method == FitMethod::Simplex);
  CHECK(f.spec.rho > 0.5);
  CHECK(f.spec.rho < 2.0);
  CHECK(f.loglik >= log_likelihood(truth, {1e-3, 0.3}, h));
  CHECK(f.n_params == 3);

  const FeatureHistogram unexposed(oracle::make_cohort({{"00000", "01000"}, {"000", "001"}}));
  const auto d = fit_numeric(ModelKind::Delayed, unexposed);
  CHECK(d.loglik == doctest::Approx(fit_null(unexposed).loglik).epsilon(1e-9));

  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const FeatureHistogram rh(oracle::random_cohort(rng, 40, 25));
    const auto closed = fit_current_use(rh);
    const auto numeric = fit_numeric(ModelKind::CurrentUse, rh);
    CHECK(std::abs(numeric.loglik - closed.loglik) <= 1e-6);
  }
  CHECK_THROWS_AS(fit_numeric(ModelKind::Past, h), std::invalid_argument);
}

TEST_CASE("fit_model dispatch") {
  std::mt19937_64 rng(12);
  const FeatureHistogram h(oracle::random_cohort(rng, 30, 20));
  const auto fits = fit_models(kAllModelKinds, h);
  REQUIRE(fits.size() == kAllModelKinds.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    CHECK(fits[i].spec.kind == kAllModelKinds[i]);
    CHECK(fits[i].n_params == param_count(kAllModelKinds[i]) + 2);
    CHECK(fits[i].n_patients == h.n_patients());
    CHECK(fits[i].loglik <= 0.0);
  }
  const auto past = fit_model(ModelKind::Past, h);
  const auto direct = fit_past(h);
  CHECK(past.spec == direct.spec);
  CHECK(past.loglik == direct.loglik);
  CHECK(past.params == direct.params);
}

TEST_CASE("every model scores at least the nested null") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 25; ++i) {
    const FeatureHistogram h(oracle::random_cohort(rng, 25, 20, 0.1));
    const auto null = fit_null(h);
    for (auto kind : kAllModelKinds) {
      if (kind == ModelKind::Past && h.horizon() < 2) continue;
      CHECK(fit_model(kind, h).loglik >= null.loglik - 1e-9);
    }
  }
}

TEST_CASE("search reparameterization") {
  ModelSpec base;
  base.kind = ModelKind::DelayedDecaying;
  base.mu = 7;
  base.sigma = 2;
  base.rho = 0.4;
  base.horizon = 30;
  const detail::Reparameterization rp{base, true};
  CHECK(rp.dimension() == 5);

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const FeatureHistogram h(oracle::random_cohort(rng, 20, 30));
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(rp.dimension());
    for (auto& v : x) v = u(rng);
    ModelSpec s;
    ModelParams p;
    rp.from_search(x, s, p);
    // Objective value depends on the search point only through the decoded parameters.
    CHECK(log_likelihood(RiskFunction(s), p, h) == log_likelihood(s, p, h));
    const auto back = rp.to_search(s, p);
    ModelSpec s2;
    ModelParams p2;
    rp.from_search(back, s2, p2);
    CHECK(log_likelihood(RiskFunction(s2), p2, h) == doctest::Approx(log_likelihood(s, p, h)).epsilon(1e-12));
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-12));
  }

  const detail::Reparameterization null_rp{ModelSpec{}, false};
  CHECK(null_rp.dimension() == 1);
  ModelSpec s;
  ModelParams p;
  const std::vector<double> x{0.3};
  null_rp.from_search(x, s, p);
  CHECK(p.pi0 == p.pi1);
}

TEST_CASE("fits are deterministic") {
  std::mt19937_64 rng(15);
  const FeatureHistogram h(oracle::random_cohort(rng, 30, 20));
  SimplexConfig cfg;
  cfg.seed = 99;
  for (auto kind : kAllModelKinds) {
    const auto a = fit_model(kind, h, cfg);
    const auto b = fit_model(kind, h, cfg);
    CHECK(a.loglik == b.loglik);
    CHECK(a.spec == b.spec);
    CHECK(a.params == b.params);
  }
}
