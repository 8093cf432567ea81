// adrsig: fit exposure models to drug/ADR cohorts, detect signals, and run
// the simulation study.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "adrsig/cohort.hpp"
#include "adrsig/estimation.hpp"
#include "adrsig/harness.hpp"
#include "adrsig/report_io.hpp"
#include "adrsig/selection.hpp"
#include "adrsig/simulator.hpp"

namespace fs = std::filesystem;
using namespace adrsig;

namespace {

// Thrown for bad flag values detected after CLI11 parsing; exits 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path == "-") return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

PairLabel label_for(const std::string& path, const std::string& drug, const std::string& adr) {
  PairLabel label{drug, adr};
  if (label.drug.empty()) label.drug = fs::path(path).stem().string();
  return label;
}

std::vector<ModelKind> parse_kind_list(const std::string& text) {
  if (text == "all") return {kAllModelKinds.begin(), kAllModelKinds.end()};
  std::vector<ModelKind> kinds;
  std::stringstream in(text);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (!name.empty()) kinds.push_back(parse_model_kind(name));
  }
  if (kinds.empty()) throw UsageError("--models: empty model list");
  return kinds;
}

struct FitFlags {
  std::uint64_t seed = 0;
  int starts = 5;
  int max_iterations = 2000;
  std::string penalty = "estimated";

  void add(CLI::App* cmd) {
    cmd->add_option("--fit-seed", seed, "Seed for jittered simplex starts");
    cmd->add_option("--starts", starts, "Simplex starts per model")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iterations", max_iterations, "Simplex iteration budget per start")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--null-penalty", penalty, "BIC parameter charge for the null model: estimated|uniform")
        ->check(CLI::IsMember({"estimated", "uniform"}));
  }
  SimplexConfig simplex() const {
    SimplexConfig c;
    c.seed = seed;
    c.starts = starts;
    c.simplex.max_iterations = max_iterations;
    return c;
  }
  PenaltyConvention convention() const { return parse_penalty_convention(penalty); }
};

nlohmann::json cohort_summary(const std::string& path, const Cohort& cohort) {
  return {{"path", path},
          {"drug", cohort.label().drug},
          {"adr", cohort.label().adr},
          {"n_patients", cohort.size()},
          {"total_cells", cohort.total_cells()},
          {"max_length", cohort.max_length()},
          {"total_adr", cohort.total_adr()}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string bitstrings;
  std::vector<std::string> set;
  std::string drug = "drug", adr = "adr";
};

int run_simulate(const SimulateArgs& a) {
  SimulationConfig config;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw std::runtime_error("cannot open config '" + a.config + "'");
    config = parse_simulation_config(in);
  }
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_simulation_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const auto cohort = simulate_cohort(config, {a.drug, a.adr});
  {
    Output out(a.out);
    write_cohort_csv(out.stream(), cohort);
  }
  if (!a.bitstrings.empty()) {
    Output bits(a.bitstrings);
    write_bitstrings(bits.stream(), cohort);
  }
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string cohort;
  std::string models = "all";
  std::string out = "-";
  std::string csv;
  std::string drug, adr = "adr";
  FitFlags flags;
};

int run_fit(const FitArgs& a) {
  const auto cohort = read_cohort_file(a.cohort, label_for(a.cohort, a.drug, a.adr));
  const FeatureHistogram hist(cohort);
  const auto kinds = parse_kind_list(a.models);
  const auto config = a.flags.simplex();
  const auto fits = fit_models(kinds, hist, config);

  nlohmann::json doc;
  doc["metadata"] = fit_metadata(config, a.flags.convention());
  doc["cohort"] = cohort_summary(a.cohort, cohort);
  doc["fits"] = nlohmann::json::array();
  for (const auto& f : fits) {
    auto j = to_json(f);
    j["bic"] = bic(f, a.flags.convention());
    doc["fits"].push_back(std::move(j));
  }
  Output out(a.out);
  out.stream() << std::setw(2) << doc << '\n';
  if (!a.csv.empty()) {
    Output csv(a.csv);
    write_fits_csv(csv.stream(), fits, a.flags.convention());
  }
  return 0;
}

// ------------------------------------------------------------------ detect

struct DetectArgs {
  std::vector<std::string> cohorts;
  std::string rule = "bic";
  double threshold = kDefaultPosteriorThreshold;
  std::string out = "-";
  FitFlags flags;
};

int run_detect(const DetectArgs& a) {
  const auto rule = parse_selection_rule(a.rule);
  const auto config = a.flags.simplex();
  std::vector<SignalReport> reports;
  std::vector<nlohmann::json> summaries;
  for (const auto& path : a.cohorts) {
    const auto cohort = read_cohort_file(path, label_for(path, "", "adr"));
    const FeatureHistogram hist(cohort);
    auto cmp = compare_models(fit_models(kAllModelKinds, hist, config), a.flags.convention());
    reports.push_back(decide(cmp, cohort.label(), a.threshold));
    summaries.push_back(cohort_summary(path, cohort));
  }
  nlohmann::json doc;
  doc["metadata"] = fit_metadata(config, a.flags.convention());
  doc["metadata"]["rule"] = std::string(to_string(rule));
  doc["metadata"]["threshold"] = a.threshold;
  doc["reports"] = nlohmann::json::array();
  int rank = 1;
  for (auto i : rank_order(reports)) {
    const auto& r = reports[i];
    auto j = to_json(r);
    j["rank"] = rank++;
    j["signal"] = rule == SelectionRule::Bic ? r.decision_posterior : r.decision_maxlik;
    j["cohort"] = summaries[i];
    doc["reports"].push_back(std::move(j));
  }
  Output out(a.out);
  out.stream() << std::setw(2) << doc << '\n';
  return 0;
}

// -------------------------------------------------------------- sweep-past

struct SweepArgs {
  std::string cohort;
  int pmax = 0;  // 0 = T - 1
  std::string out = "-";
  std::string penalty = "estimated";
};

int run_sweep(const SweepArgs& a) {
  const auto cohort = read_cohort_file(a.cohort, label_for(a.cohort, "", "adr"));
  const FeatureHistogram hist(cohort);
  const int pmax = a.pmax > 0 ? a.pmax : hist.horizon() - 1;
  const auto sweep = sweep_past_bic(hist, pmax, parse_penalty_convention(a.penalty));
  Output out(a.out);
  write_sweep_csv(out.stream(), sweep);
  return 0;
}

// -------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string grid;
  int reps = 0;  // 0 = from the grid file
  std::uint64_t seed = 0;
  std::string rule = "both";
  std::string out;
  unsigned threads = 0;
  FitFlags flags;
};

std::string setting_tag(std::size_t index) {
  std::ostringstream s;
  s << "setting_" << std::setw(2) << std::setfill('0') << index;
  return s.str();
}

int run_experiment(const ExperimentArgs& a) {
  GridConfig grid;
  if (!a.grid.empty()) {
    std::ifstream in(a.grid);
    if (!in) throw std::runtime_error("cannot open grid '" + a.grid + "'");
    grid = parse_grid_config(in);
  }
  if (a.reps > 0) grid.reps = a.reps;
  std::vector<SelectionRule> rules;
  if (a.rule == "both") {
    rules = {SelectionRule::Bic, SelectionRule::MaxLikelihood};
  } else {
    rules = {parse_selection_rule(a.rule)};
  }

  ExperimentOptions options;
  options.seed = a.seed;
  options.threads = a.threads;
  options.simplex = a.flags.simplex();
  options.penalty = a.flags.convention();
  const auto results = run_grid(grid, options);

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  std::ofstream metrics(dir / "metrics.csv");
  if (!metrics) throw std::runtime_error("cannot write to '" + a.out + "'");
  write_metrics_csv_header(metrics);
  std::size_t failures = 0;
  for (const auto& res : results) {
    const auto tag = setting_tag(res.setting.index);
    std::ofstream per_setting(dir / (tag + "_metrics.csv"));
    write_metrics_csv_header(per_setting);
    for (auto rule : rules) {
      std::ofstream confusion(dir / (tag + "_confusion_" + std::string(to_string(rule)) + ".csv"));
      write_confusion_csv(confusion, res.confusion(rule), res.true_models);
      const auto m = res.metrics(rule);
      write_metrics_csv_row(metrics, res.setting, m, rule);
      write_metrics_csv_row(per_setting, res.setting, m, rule);
    }
    failures += res.failures.size();
  }

  std::ofstream diagnostics(dir / "diagnostics.csv");
  diagnostics << "setting,true_model,rep,message\n";
  for (const auto& res : results) {
    for (const auto& f : res.failures) {
      diagnostics << res.setting.index << ',' << true_model_label(f.true_model) << ',' << f.rep << ",\""
                  << f.message << "\"\n";
    }
  }

  nlohmann::json run;
  run["metadata"] = fit_metadata(options.simplex, options.penalty);
  run["seed"] = a.seed;
  run["reps"] = grid.reps;
  run["n_patients"] = grid.n_patients;
  run["horizon"] = grid.horizon;
  run["mean_duration"] = grid.mean_duration;
  run["settings"] = results.size();
  run["failed_runs"] = failures;
  std::ofstream(dir / "run.json") << std::setw(2) << run << '\n';
  if (failures > 0) std::cerr << "warning: experiment: " << failures << " runs failed, see diagnostics.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exposure-model signal detection for drug/ADR pairs"};
  app.name("adrsig");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a cohort");
  simulate->add_option("--config", sim.config, "Key-value simulation config");
  simulate->add_option("--out", sim.out, "Cohort CSV output ('-' for stdout)")->required();
  simulate->add_option("--set", sim.set, "Override a config key, e.g. --set pi1=0.3");
  simulate->add_option("--bitstrings", sim.bitstrings, "Also write one exposure/ADR bit-string line per patient");
  simulate->add_option("--drug", sim.drug, "Drug label");
  simulate->add_option("--adr", sim.adr, "ADR label");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit exposure models to a cohort");
  fit_cmd->add_option("--cohort", fit.cohort, "Cohort CSV")->required();
  fit_cmd->add_option("--models", fit.models, "'all' or a comma-separated list of model kinds");
  fit_cmd->add_option("--out", fit.out, "JSON output ('-' for stdout)");
  fit_cmd->add_option("--csv", fit.csv, "Also write a CSV table of the fits");
  fit_cmd->add_option("--drug", fit.drug, "Drug label (default: file stem)");
  fit_cmd->add_option("--adr", fit.adr, "ADR label");
  fit.flags.add(fit_cmd);

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Score and rank drug/ADR pairs");
  detect->add_option("--cohort", det.cohorts, "Cohort CSV; repeat for several pairs")->required();
  detect->add_option("--rule", det.rule, "Decision rule: bic|maxlik")->check(CLI::IsMember({"bic", "maxlik"}));
  detect->add_option("--threshold", det.threshold, "Null posterior below which a pair is a signal")
      ->check(CLI::Range(0.0, 1.0));
  detect->add_option("--out", det.out, "JSON output ('-' for stdout)");
  det.flags.add(detect);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep-past", "BIC of the past-use model for every window p");
  sweep->add_option("--cohort", sw.cohort, "Cohort CSV")->required();
  sweep->add_option("--pmax", sw.pmax, "Largest window (default T-1)")->check(CLI::NonNegativeNumber);
  sweep->add_option("--out", sw.out, "CSV output ('-' for stdout)");
  sweep->add_option("--null-penalty", sw.penalty, "estimated|uniform")
      ->check(CLI::IsMember({"estimated", "uniform"}));

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run the simulation study grid");
  experiment->add_option("--grid", ex.grid, "Key-value grid file (default: full study grid)");
  experiment->add_option("--reps", ex.reps, "Repetitions per true model (overrides the grid)")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--seed", ex.seed, "Base seed");
  experiment->add_option("--rule", ex.rule, "bic|maxlik|both")->check(CLI::IsMember({"bic", "maxlik", "both"}));
  experiment->add_option("--out", ex.out, "Output directory")->required();
  experiment->add_option("--threads", ex.threads, "Worker threads (0 = all cores)");
  ex.flags.add(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n' << app.help();
    return 2;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    if (sub == simulate) return run_simulate(sim);
    if (sub == fit_cmd) return run_fit(fit);
    if (sub == detect) return run_detect(det);
    if (sub == sweep) return run_sweep(sw);
    if (sub == experiment) return run_experiment(ex);
  } catch (const UsageError& e) {
    std::cerr << "error: " << sub->get_name() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << sub->get_name() << ": " << msg << '\n';
    return 1;
  }
  return 2;
}
