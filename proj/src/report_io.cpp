#include "adrsig/report_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace adrsig {

using nlohmann::json;

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_real(*value) : std::string("n/a");
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json("n/a"); }

}  // namespace

json to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  for (auto p : continuous_params(spec.kind)) j[std::string(to_string(p))] = spec.get(p);
  if (has_window(spec.kind)) j["p"] = spec.window;
  j["horizon"] = spec.horizon;
  return j;
}

json to_json(const FitResult& fit) {
  json j;
  j["model"] = to_json(fit.spec);
  j["pi0"] = fit.params.pi0;
  j["pi1"] = fit.params.pi1;
  j["loglik"] = fit.loglik;
  j["n_params"] = fit.n_params;
  j["n_patients"] = fit.n_patients;
  j["method"] = std::string(to_string(fit.method));
  j["converged"] = fit.converged;
  j["starts"] = fit.starts;
  j["evaluations"] = fit.evaluations;
  return j;
}

json to_json(const SignalReport& r) {
  json j;
  j["drug"] = r.pair.drug;
  j["adr"] = r.pair.adr;
  j["null_posterior"] = r.null_posterior;
  j["decision_posterior"] = r.decision_posterior;
  j["decision_maxlik"] = r.decision_maxlik;
  j["rank_key"] = r.rank_key;
  j["best_model"] = to_json(r.best_model);
  json models = json::array();
  for (std::size_t i = 0; i < r.comparison.fits.size(); ++i) {
    auto m = to_json(r.comparison.fits[i]);
    m["bic"] = r.comparison.bic[i];
    m["posterior"] = r.comparison.posterior[i];
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  return j;
}

json to_json(const BinaryMetrics& m) {
  return json{{"tp", m.tp},
              {"tn", m.tn},
              {"fp", m.fp},
              {"fn", m.fn},
              {"precision", optional_json(m.precision)},
              {"recall", optional_json(m.recall)},
              {"f1", optional_json(m.f1)}};
}

json fit_metadata(const SimplexConfig& s, PenaltyConvention penalty) {
  return json{{"optimizer",
               {{"method", "nelder_mead"},
                {"ftol_rel", s.simplex.ftol_rel},
                {"xtol", s.simplex.xtol},
                {"max_iterations", s.simplex.max_iterations},
                {"initial_step", s.simplex.initial_step},
                {"restarts", s.simplex.restarts},
                {"starts", s.starts},
                {"jitter", s.jitter},
                {"seed", s.seed},
                {"nested_start", s.nested_start}}},
              {"bic_penalty", std::string(to_string(penalty))},
              {"bic_n", "patients"},
              {"probability_floor", kProbabilityFloor}};
}

void write_fits_csv(std::ostream& out, const std::vector<FitResult>& fits, PenaltyConvention penalty) {
  out << "kind,rho,mu,sigma,kappa,p,pi0,pi1,loglik,n_params,bic,method,converged\n";
  for (const auto& f : fits) {
    out << to_string(f.spec.kind) << ',' << format_real(f.spec.rho) << ',' << format_real(f.spec.mu) << ','
        << format_real(f.spec.sigma) << ',' << format_real(f.spec.kappa) << ',' << f.spec.window << ','
        << format_real(f.params.pi0) << ',' << format_real(f.params.pi1) << ',' << format_real(f.loglik) << ','
        << f.n_params << ',' << format_real(bic(f, penalty)) << ',' << to_string(f.method) << ','
        << (f.converged ? "true" : "false") << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "p,bic\n";
  for (const auto& pt : sweep) out << pt.p << ',' << format_real(pt.bic) << '\n';
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m, const std::vector<std::size_t>& true_models) {
  out << "selected";
  for (auto t : true_models) out << ',' << true_model_label(t);
  out << '\n';
  for (auto kind : kAllModelKinds) {
    out << to_string(kind);
    for (auto t : true_models) out << ',' << m.at(kind, t);
    out << '\n';
  }
}

void write_metrics_csv_header(std::ostream& out) {
  out << "setting,mu_E,pi0,pi1,tp,tn,fp,fn,precision,recall,f1,rule\n";
}

void write_metrics_csv_row(std::ostream& out, const GridSetting& s, const BinaryMetrics& m, SelectionRule rule) {
  out << s.index << ',' << format_real(s.prob_exposed) << ',' << format_real(s.pi0) << ',' << format_real(s.pi1)
      << ',' << m.tp << ',' << m.tn << ',' << m.fp << ',' << m.fn << ',' << format_optional(m.precision) << ','
      << format_optional(m.recall) << ',' << format_optional(m.f1) << ',' << to_string(rule) << '\n';
}

}  // namespace adrsig
