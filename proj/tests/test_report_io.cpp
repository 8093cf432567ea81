#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "adrsig/report_io.hpp"
#include "test_support.hpp"

using namespace adrsig;

TEST_CASE("format_real round-trips") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1e-4) == "1e-04");
  CHECK(format_real(-3.0) == "-3");
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e-300, -123456.789}) CHECK(std::stod(format_real(v)) == v);
  CHECK(format_optional(std::nullopt) == "n/a");
  CHECK(format_optional(0.5) == "0.5");
}

TEST_CASE("FitResult and SignalReport JSON") {
  const FeatureHistogram h(oracle::make_cohort({{"0110", "0010"}, {"1000", "0100"}}));
  const auto fits = fit_models(kAllModelKinds, h);
  const auto j = to_json(fits[7]);
  CHECK(j["model"]["kind"] == "past");
  CHECK(j["model"].contains("p"));
  CHECK(j["method"] == "closed_form");
  CHECK(j["n_params"] == 3);
  CHECK(j["loglik"].get<double>() == fits[7].loglik);

  const auto dd = to_json(fits[5]);
  for (const char* key : {"mu", "sigma", "rho"}) CHECK(dd["model"].contains(key));
  CHECK(dd["method"] == "simplex");

  const auto report = decide(compare_models(fits), {"drugA", "rash"});
  const auto r = to_json(report);
  CHECK(r["drug"] == "drugA");
  CHECK(r["adr"] == "rash");
  CHECK(r["models"].size() == 8);
  CHECK(r["decision_posterior"].get<bool>() == report.decision_posterior);
  double total = 0;
  for (const auto& m : r["models"]) total += m["posterior"].get<double>();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const auto meta = fit_metadata(SimplexConfig{}, PenaltyConvention::Uniform);
  CHECK(meta["bic_penalty"] == "uniform");
  CHECK(meta["bic_n"] == "patients");
  CHECK(meta["optimizer"]["starts"] == 5);
}

TEST_CASE("metrics JSON uses n/a for undefined rates") {
  const auto j = to_json(metrics_from_counts(0, 5, 0, 3));
  CHECK(j["precision"] == "n/a");
  CHECK(j["recall"].get<double>() == 0.0);
  CHECK(j["f1"] == "n/a");
}

TEST_CASE("CSV writers") {
  std::ostringstream sweep;
  write_sweep_csv(sweep, {{0, 10.5}, {1, 9.25}});
  CHECK(sweep.str() == "p,bic\n0,10.5\n1,9.25\n");

  ConfusionMatrix cm;
  cm.reps = 2;
  cm.at(ModelKind::NoAssociation, 0) = 2;
  cm.at(ModelKind::Past, 10) = 1;
  cm.at(ModelKind::CurrentUse, 10) = 1;
  std::ostringstream conf;
  write_confusion_csv(conf, cm, {0, 10});
  CHECK(conf.str() ==
        "selected,null,past_5\n"
        "no_association,2,0\n"
        "current_use,0,1\n"
        "withdrawal,0,0\n"
        "delayed,0,0\n"
        "decaying,0,0\n"
        "delayed_decaying,0,0\n"
        "long_term,0,0\n"
        "past,0,1\n");

  std::ostringstream metrics;
  write_metrics_csv_header(metrics);
  write_metrics_csv_row(metrics, {3, 0.5, 1e-3, 0.3}, metrics_from_counts(0, 20, 0, 220), SelectionRule::Bic);
  CHECK(metrics.str() ==
        "setting,mu_E,pi0,pi1,tp,tn,fp,fn,precision,recall,f1,rule\n"
        "3,0.5,0.001,0.3,0,20,0,220,n/a,0,n/a,bic\n");

  const FeatureHistogram h(oracle::make_cohort({{"0110", "0010"}}));
  std::ostringstream fits;
  write_fits_csv(fits, {fit_null(h)}, PenaltyConvention::EstimatedParameters);
  CHECK(fits.str().rfind("kind,rho,mu,sigma,kappa,p,pi0,pi1,loglik,n_params,bic,method,converged\nno_association,", 0) == 0);
}
