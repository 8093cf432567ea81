#include "adrsig/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "adrsig/random.hpp"

namespace adrsig {

namespace {

std::uint64_t pack(const ExposureFeatures& f) noexcept {
  return (std::uint64_t(f.exposed_now) << 63) | (std::uint64_t(f.ever_exposed) << 62) |
         (std::uint64_t(std::uint32_t(f.since_first)) << 31) | std::uint64_t(std::uint32_t(f.since_last));
}

double logit(double p) noexcept { return std::log(p / (1.0 - p)); }
double expit(double u) noexcept { return 1.0 / (1.0 + std::exp(-u)); }

constexpr double kStartProbFloor = 1e-6;
constexpr double kMinPositive = 1e-8;
constexpr double kMaxPositive = 1e8;

double clamp_start_prob(double p) noexcept { return std::clamp(p, kStartProbFloor, 1.0 - kStartProbFloor); }

double default_start(RiskParam param, int horizon) noexcept {
  switch (param) {
    case RiskParam::Rho: return 0.5;
    case RiskParam::Mu: return std::max(1.0, horizon / 10.0);
    case RiskParam::Sigma: return 2.0;
    case RiskParam::Kappa: return std::max(1.0, horizon / 4.0);
  }
  return 1.0;
}

double rate(std::uint64_t events, std::uint64_t trials, double fallback) noexcept {
  return trials == 0 ? fallback : static_cast<double>(events) / static_cast<double>(trials);
}

FitResult closed_form_result(const ModelSpec& spec, const ModelParams& params, double loglik,
                             std::size_t n_patients) {
  FitResult r;
  r.spec = spec;
  r.params = params;
  r.loglik = loglik;
  r.n_params = param_count(spec.kind) + 2;
  r.n_patients = n_patients;
  r.method = FitMethod::ClosedForm;
  r.converged = true;
  return r;
}

}  // namespace

FeatureHistogram::FeatureHistogram(const Cohort& cohort) {
  std::unordered_map<std::uint64_t, HistogramCell> acc;
  for (const auto& patient : cohort.patients()) {
    FeatureTracker tracker;
    for (std::size_t t = 0; t < patient.length(); ++t) {
      const auto f = tracker.advance(patient.exposure[t] != 0);
      auto& cell = acc[pack(f)];
      cell.features = f;
      if (patient.adr[t]) {
        ++cell.with_adr;
      } else {
        ++cell.without_adr;
      }
    }
  }
  cells_.reserve(acc.size());
  for (auto& [key, cell] : acc) cells_.push_back(cell);
  std::sort(cells_.begin(), cells_.end(),
            [](const HistogramCell& a, const HistogramCell& b) { return a.features < b.features; });
  total_cells_ = cohort.total_cells();
  total_adr_ = cohort.total_adr();
  n_patients_ = cohort.size();
  horizon_ = static_cast<int>(cohort.max_length());
}

FeatureHistogram FeatureHistogram::project(ModelKind kind) const {
  std::map<ExposureFeatures, HistogramCell> merged;
  for (const auto& cell : cells_) {
    const auto key = risk_relevant(kind, cell.features);
    auto& out = merged[key];
    out.features = key;
    out.with_adr += cell.with_adr;
    out.without_adr += cell.without_adr;
  }
  FeatureHistogram result;
  result.cells_.reserve(merged.size());
  for (auto& [key, cell] : merged) result.cells_.push_back(cell);
  result.total_cells_ = total_cells_;
  result.total_adr_ = total_adr_;
  result.n_patients_ = n_patients_;
  result.horizon_ = horizon_;
  return result;
}

ContingencyCounts FeatureHistogram::window_counts(int p) const noexcept {
  ContingencyCounts counts;
  for (const auto& cell : cells_) {
    const auto& f = cell.features;
    if (f.ever_exposed && f.since_last <= p) {
      counts.a += cell.with_adr;
      counts.b += cell.without_adr;
    } else {
      counts.c += cell.with_adr;
      counts.d += cell.without_adr;
    }
  }
  return counts;
}

double log_likelihood(const RiskFunction& risk, const ModelParams& params, const FeatureHistogram& hist) {
  double total = 0.0;
  for (const auto& cell : hist.cells()) {
    const double prob = adr_probability(params, risk(cell.features));
    if (cell.with_adr) total += double(cell.with_adr) * std::log(std::max(prob, kProbabilityFloor));
    if (cell.without_adr) total += double(cell.without_adr) * std::log(std::max(1.0 - prob, kProbabilityFloor));
  }
  return total;
}

double log_likelihood(const ModelSpec& spec, const ModelParams& params, const FeatureHistogram& hist) {
  if (!(params.pi0 >= 0.0 && params.pi0 <= 1.0 && params.pi1 >= 0.0 && params.pi1 <= 1.0)) {
    throw std::invalid_argument("log_likelihood: pi0 and pi1 must lie in [0,1]");
  }
  return log_likelihood(RiskFunction(spec), params, hist);
}

std::string_view to_string(FitMethod method) noexcept {
  return method == FitMethod::ClosedForm ? "closed_form" : "simplex";
}

double binomial_loglik(std::uint64_t events, std::uint64_t trials) noexcept {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double k = static_cast<double>(events);
  double value = 0.0;
  if (events > 0) value += k * std::log(k / n);
  if (events < trials) value += (n - k) * std::log((n - k) / n);
  return value;
}

double contingency_loglik(const ContingencyCounts& c) noexcept {
  return binomial_loglik(c.a, c.a + c.b) + binomial_loglik(c.c, c.c + c.d);
}

ModelParams contingency_mle(const ContingencyCounts& c) noexcept {
  const double pooled = rate(c.a + c.c, c.total(), 0.0);
  return {rate(c.c, c.c + c.d, pooled), rate(c.a, c.a + c.b, pooled)};
}

FitResult fit_null(const FeatureHistogram& hist) {
  if (hist.total_cells() == 0) throw std::invalid_argument("fit_null: empty histogram");
  const double pi0 = rate(hist.total_adr(), hist.total_cells(), 0.0);
  ModelSpec spec;
  spec.horizon = hist.horizon();
  return closed_form_result(spec, {pi0, pi0}, binomial_loglik(hist.total_adr(), hist.total_cells()),
                            hist.n_patients());
}

FitResult fit_current_use(const FeatureHistogram& hist) {
  const auto counts = hist.window_counts(0);
  ModelSpec spec;
  spec.kind = ModelKind::CurrentUse;
  spec.horizon = hist.horizon();
  return closed_form_result(spec, contingency_mle(counts), contingency_loglik(counts), hist.n_patients());
}

std::vector<PastProfilePoint> past_profile(const FeatureHistogram& hist, int p_max) {
  if (p_max < 1 || p_max > hist.horizon() - 1) {
    throw std::out_of_range("past window p_max=" + std::to_string(p_max) + " outside 1.." +
                            std::to_string(hist.horizon() - 1));
  }
  // Per-lag tallies of exposed cells, so every window is a prefix sum.
  std::vector<ContingencyCounts> by_lag(static_cast<std::size_t>(hist.horizon()));
  ContingencyCounts never;
  for (const auto& cell : hist.cells()) {
    if (!cell.features.ever_exposed) {
      never.c += cell.with_adr;
      never.d += cell.without_adr;
      continue;
    }
    auto& slot = by_lag[static_cast<std::size_t>(cell.features.since_last)];
    slot.a += cell.with_adr;
    slot.b += cell.without_adr;
  }
  std::uint64_t exposed_adr = 0;
  std::uint64_t exposed_clear = 0;
  for (const auto& slot : by_lag) {
    exposed_adr += slot.a;
    exposed_clear += slot.b;
  }

  std::vector<PastProfilePoint> profile;
  profile.reserve(static_cast<std::size_t>(p_max));
  std::uint64_t in_a = by_lag[0].a;
  std::uint64_t in_b = by_lag[0].b;
  for (int p = 1; p <= p_max; ++p) {
    in_a += by_lag[static_cast<std::size_t>(p)].a;
    in_b += by_lag[static_cast<std::size_t>(p)].b;
    PastProfilePoint point;
    point.p = p;
    point.counts = {in_a, in_b, never.c + (exposed_adr - in_a), never.d + (exposed_clear - in_b)};
    point.params = contingency_mle(point.counts);
    point.loglik = contingency_loglik(point.counts);
    profile.push_back(point);
  }
  return profile;
}

FitResult fit_past(const FeatureHistogram& hist) {
  if (hist.horizon() < 2) throw std::invalid_argument("fit_past: needs max T_k >= 2");
  const auto profile = past_profile(hist, hist.horizon() - 1);
  const PastProfilePoint* best = &profile.front();
  for (const auto& point : profile) {
    if (point.loglik > best->loglik) best = &point;
  }
  ModelSpec spec;
  spec.kind = ModelKind::Past;
  spec.window = best->p;
  spec.horizon = hist.horizon();
  return closed_form_result(spec, best->params, best->loglik, hist.n_patients());
}

namespace detail {

std::size_t Reparameterization::dimension() const noexcept {
  return 1 + (pi1_free ? 1 : 0) + continuous_params(base.kind).size();
}

std::vector<double> Reparameterization::to_search(const ModelSpec& spec, const ModelParams& params) const {
  std::vector<double> u;
  u.reserve(dimension());
  u.push_back(logit(params.pi0));
  if (pi1_free) u.push_back(logit(params.pi1));
  for (auto param : continuous_params(base.kind)) u.push_back(std::log(spec.get(param)));
  return u;
}

void Reparameterization::from_search(std::span<const double> u, ModelSpec& spec,
                                     ModelParams& params) const noexcept {
  spec = base;
  std::size_t i = 0;
  params.pi0 = expit(u[i++]);
  params.pi1 = pi1_free ? expit(u[i++]) : params.pi0;
  for (auto param : continuous_params(base.kind)) {
    spec.set(param, std::clamp(std::exp(u[i++]), kMinPositive, kMaxPositive));
  }
}

}  // namespace detail

FitResult fit_numeric(const ModelSpec& model, const FeatureHistogram& hist, const SimplexConfig& config) {
  if (hist.total_cells() == 0) throw std::invalid_argument("fit_numeric: empty histogram");
  if (config.starts < 1) throw std::invalid_argument("fit_numeric: need at least one start");

  ModelSpec base = model;
  if (base.horizon == 0) base.horizon = hist.horizon();
  for (auto param : continuous_params(base.kind)) {
    if (!(base.get(param) > 0.0)) base.set(param, default_start(param, base.horizon));
  }
  validate(base);

  const detail::Reparameterization reparam{base, base.kind != ModelKind::NoAssociation};

  FitResult result;
  result.n_params = param_count(base.kind) + 2;
  result.n_patients = hist.n_patients();
  result.method = FitMethod::Simplex;

  const double pooled = rate(hist.total_adr(), hist.total_cells(), 0.0);
  if (hist.total_adr() == 0 || hist.total_adr() == hist.total_cells()) {
    // Boundary MLE: every cell has the same outcome, pi0 = pi1 = pooled fits exactly.
    result.spec = base;
    result.params = {pooled, pooled};
    result.loglik = log_likelihood(base, result.params, hist);
    result.converged = true;
    return result;
  }

  // Moment-based start.
  std::uint64_t never_adr = 0, never_cells = 0, exposed_adr = 0, exposed_cells = 0;
  for (const auto& cell : hist.cells()) {
    const auto n = cell.with_adr + cell.without_adr;
    if (!cell.features.ever_exposed) {
      never_adr += cell.with_adr;
      never_cells += n;
    } else if (cell.features.exposed_now) {
      exposed_adr += cell.with_adr;
      exposed_cells += n;
    }
  }
  const ModelParams moment{clamp_start_prob(rate(never_adr, never_cells, pooled)),
                           clamp_start_prob(rate(exposed_adr, exposed_cells, pooled))};

  const auto projected = hist.project(base.kind);
  const auto objective = [&](std::span<const double> u) {
    ModelSpec spec;
    ModelParams params;
    reparam.from_search(u, spec, params);
    return -log_likelihood(RiskFunction(spec), params, projected);
  };

  std::vector<std::vector<double>> starts;
  const auto moment_u = reparam.to_search(base, moment);
  starts.push_back(moment_u);
  for (int s = 1; s < config.starts; ++s) {
    StreamRng rng(derive_seed(config.seed, {index_of(base.kind), static_cast<std::uint64_t>(s)}));
    auto u = moment_u;
    for (auto& x : u) x += rng.uniform(-config.jitter, config.jitter);
    starts.push_back(std::move(u));
  }
  if (config.nested_start && base.kind != ModelKind::NoAssociation) {
    starts.push_back(reparam.to_search(base, {pooled, pooled}));
  }

  SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& start : starts) {
    auto run = nelder_mead(objective, start, config.simplex);
    result.evaluations += run.evaluations;
    any_converged = any_converged || run.converged;
    if (run.value < best.value) best = std::move(run);
  }
  result.starts = static_cast<int>(starts.size());
  if (!std::isfinite(best.value)) {
    throw std::runtime_error("fit_numeric(" + std::string(to_string(base.kind)) +
                             "): objective non-finite at every start");
  }
  reparam.from_search(best.x, result.spec, result.params);
  result.loglik = log_likelihood(RiskFunction(result.spec), result.params, hist);
  result.converged = any_converged;
  return result;
}

FitResult fit_numeric(ModelKind kind, const FeatureHistogram& hist, const SimplexConfig& config) {
  if (has_window(kind)) {
    throw std::invalid_argument("fit_numeric: past needs a fixed p; pass a ModelSpec");
  }
  ModelSpec spec;
  spec.kind = kind;
  return fit_numeric(spec, hist, config);
}

FitResult fit_model(ModelKind kind, const FeatureHistogram& hist, const SimplexConfig& config) {
  switch (kind) {
    case ModelKind::NoAssociation: return fit_null(hist);
    case ModelKind::CurrentUse: return fit_current_use(hist);
    case ModelKind::Past: return fit_past(hist);
    default: return fit_numeric(kind, hist, config);
  }
}

std::vector<FitResult> fit_models(std::span<const ModelKind> kinds, const FeatureHistogram& hist,
                                  const SimplexConfig& config) {
  std::vector<FitResult> fits;
  fits.reserve(kinds.size());
  for (auto kind : kinds) fits.push_back(fit_model(kind, hist, config));
  return fits;
}

}  // namespace adrsig
