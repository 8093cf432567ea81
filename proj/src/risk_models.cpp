#include "adrsig/risk_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace adrsig {

namespace {

constexpr std::array<std::string_view, 8> kKindNames{
    "no_association", "current_use", "withdrawal", "delayed",
    "decaying",       "delayed_decaying", "long_term", "past",
};

constexpr std::array<RiskParam, 1> kRho{RiskParam::Rho};
constexpr std::array<RiskParam, 2> kMuSigma{RiskParam::Mu, RiskParam::Sigma};
constexpr std::array<RiskParam, 3> kMuSigmaRho{RiskParam::Mu, RiskParam::Sigma, RiskParam::Rho};
constexpr std::array<RiskParam, 2> kRhoKappa{RiskParam::Rho, RiskParam::Kappa};
constexpr std::array<RiskParam, 4> kAllParams{RiskParam::Rho, RiskParam::Mu, RiskParam::Sigma,
                                              RiskParam::Kappa};

double gaussian_bump(double s, double mu, double sigma) noexcept {
  const double z = (s - mu) / sigma;
  return std::exp(-0.5 * z * z);
}

double parse_number(std::string_view text, std::string_view key) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

int parse_int(std::string_view text, std::string_view key) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad integer for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept { return kKindNames[index_of(kind)]; }

ModelKind parse_model_kind(std::string_view name) {
  for (auto kind : kAllModelKinds) {
    if (to_string(kind) == name) return kind;
  }
  if (name == "null") return ModelKind::NoAssociation;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(RiskParam param) noexcept {
  switch (param) {
    case RiskParam::Rho: return "rho";
    case RiskParam::Mu: return "mu";
    case RiskParam::Sigma: return "sigma";
    case RiskParam::Kappa: return "kappa";
  }
  return "?";
}

std::span<const RiskParam> continuous_params(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Withdrawal:
    case ModelKind::Decaying: return kRho;
    case ModelKind::Delayed: return kMuSigma;
    case ModelKind::DelayedDecaying: return kMuSigmaRho;
    case ModelKind::LongTerm: return kRhoKappa;
    case ModelKind::NoAssociation:
    case ModelKind::CurrentUse:
    case ModelKind::Past: break;
  }
  return {};
}

int param_count(ModelKind kind) noexcept {
  return static_cast<int>(continuous_params(kind).size()) + (has_window(kind) ? 1 : 0);
}

double ModelSpec::get(RiskParam param) const noexcept {
  switch (param) {
    case RiskParam::Rho: return rho;
    case RiskParam::Mu: return mu;
    case RiskParam::Sigma: return sigma;
    case RiskParam::Kappa: return kappa;
  }
  return 0.0;
}

void ModelSpec::set(RiskParam param, double value) noexcept {
  switch (param) {
    case RiskParam::Rho: rho = value; break;
    case RiskParam::Mu: mu = value; break;
    case RiskParam::Sigma: sigma = value; break;
    case RiskParam::Kappa: kappa = value; break;
  }
}

void validate(const ModelSpec& spec) {
  const auto used = continuous_params(spec.kind);
  for (auto param : kAllParams) {
    const bool needed = std::find(used.begin(), used.end(), param) != used.end();
    const double v = spec.get(param);
    if (needed && !(v > 0.0 && std::isfinite(v))) {
      throw std::invalid_argument(std::string(to_string(spec.kind)) + ": " +
                                  std::string(to_string(param)) + " must be finite and > 0");
    }
    if (!needed && v != 0.0) {
      throw std::invalid_argument(std::string(to_string(spec.kind)) + " takes no " +
                                  std::string(to_string(param)) + " parameter");
    }
  }
  if (has_window(spec.kind)) {
    if (spec.window < 1) throw std::invalid_argument("past: p must be >= 1");
    if (spec.horizon > 0 && spec.window > spec.horizon - 1) {
      throw std::invalid_argument("past: p must be <= T-1");
    }
  } else if (spec.window != 0) {
    throw std::invalid_argument(std::string(to_string(spec.kind)) + " takes no p parameter");
  }
  if (spec.horizon < 0) throw std::invalid_argument("horizon T must be >= 0");
  if (spec.kind == ModelKind::DelayedDecaying && spec.horizon < 2) {
    throw std::invalid_argument("delayed_decaying: horizon T >= 2 required for normalisation");
  }
}

std::string format_spec(const ModelSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "kind=" << to_string(spec.kind);
  for (auto param : continuous_params(spec.kind)) out << ' ' << to_string(param) << '=' << spec.get(param);
  if (has_window(spec.kind)) out << " p=" << spec.window;
  if (spec.horizon > 0) out << " T=" << spec.horizon;
  return out.str();
}

ModelSpec parse_spec(std::string_view text) {
  ModelSpec spec;
  bool have_kind = false;
  std::vector<std::pair<std::string_view, std::string_view>> pairs;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == ',')) ++pos;
    if (pos >= text.size()) break;
    auto end = text.find_first_of(" \t,", pos);
    if (end == std::string_view::npos) end = text.size();
    auto token = text.substr(pos, end - pos);
    pos = end;
    auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == token.size()) {
      throw std::invalid_argument("expected key=value, got '" + std::string(token) + "'");
    }
    pairs.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  for (auto [key, value] : pairs) {
    if (key == "kind") {
      spec.kind = parse_model_kind(value);
      have_kind = true;
    } else if (key == "rho") {
      spec.rho = parse_number(value, key);
    } else if (key == "mu") {
      spec.mu = parse_number(value, key);
    } else if (key == "sigma") {
      spec.sigma = parse_number(value, key);
    } else if (key == "kappa") {
      spec.kappa = parse_number(value, key);
    } else if (key == "p") {
      spec.window = parse_int(value, key);
    } else if (key == "T") {
      spec.horizon = parse_int(value, key);
    } else {
      throw std::invalid_argument("unknown model parameter '" + std::string(key) + "'");
    }
  }
  if (!have_kind) throw std::invalid_argument("model spec needs kind=...");
  validate(spec);
  return spec;
}

double normalizing_constant(double mu, double sigma, double rho, int horizon) {
  if (!(mu > 0 && sigma > 0 && rho > 0)) {
    throw std::invalid_argument("normalizing_constant: mu, sigma, rho must be > 0");
  }
  if (horizon < 2) throw std::invalid_argument("normalizing_constant: horizon must be >= 2");
  double best = 0.0;
  for (int s = 1; s <= horizon - 1; ++s) {
    best = std::max(best, gaussian_bump(s, mu, sigma) + std::exp(-rho * s));
  }
  return best;
}

RiskFunction::RiskFunction(const ModelSpec& spec) : spec_(spec) {
  validate(spec_);
  if (spec_.kind == ModelKind::DelayedDecaying) {
    inv_norm_ = 1.0 / normalizing_constant(spec_.mu, spec_.sigma, spec_.rho, spec_.horizon);
  }
}

double RiskFunction::operator()(const ExposureFeatures& f) const noexcept {
  switch (spec_.kind) {
    case ModelKind::NoAssociation: return 0.0;
    case ModelKind::CurrentUse: return f.exposed_now ? 1.0 : 0.0;
    case ModelKind::Withdrawal:
      if (!f.ever_exposed || f.exposed_now) return 0.0;
      return std::exp(-spec_.rho * f.since_last);
    case ModelKind::Delayed:
      if (!f.ever_exposed) return 0.0;
      return gaussian_bump(f.since_first, spec_.mu, spec_.sigma);
    case ModelKind::Decaying:
      if (!f.ever_exposed) return 0.0;
      return std::exp(-spec_.rho * f.since_first);
    case ModelKind::DelayedDecaying: {
      if (!f.ever_exposed) return 0.0;
      const double sum = gaussian_bump(f.since_first, spec_.mu, spec_.sigma) +
                         std::exp(-spec_.rho * f.since_first);
      // tsf = 0 lies outside the normalisation grid and may exceed C.
      return std::min(1.0, sum * inv_norm_);
    }
    case ModelKind::LongTerm:
      if (!f.ever_exposed) return 0.0;
      return 1.0 / (1.0 + std::exp(-spec_.rho * (f.since_first - spec_.kappa)));
    case ModelKind::Past:
      return (f.ever_exposed && f.since_last <= spec_.window) ? 1.0 : 0.0;
  }
  return 0.0;
}

void validate(const ExposureFeatures& f) {
  if (f.since_first < 0 || f.since_last < 0) {
    throw std::invalid_argument("exposure features: negative elapsed time");
  }
  if (!f.ever_exposed) {
    if (f.exposed_now || f.since_first != 0 || f.since_last != 0) {
      throw std::invalid_argument("exposure features: never-exposed history with exposure data");
    }
    return;
  }
  if (f.since_last > f.since_first) {
    throw std::invalid_argument("exposure features: since_last exceeds since_first");
  }
  if (f.exposed_now != (f.since_last == 0)) {
    throw std::invalid_argument("exposure features: since_last must be 0 exactly when exposed now");
  }
}

double risk(const ModelSpec& spec, const ExposureFeatures& f) {
  validate(f);
  return RiskFunction(spec)(f);
}

ExposureFeatures risk_relevant(ModelKind kind, const ExposureFeatures& f) noexcept {
  const ExposureFeatures never{};
  switch (kind) {
    case ModelKind::NoAssociation: return never;
    case ModelKind::CurrentUse:
      return f.exposed_now ? ExposureFeatures{true, true, 0, 0} : never;
    case ModelKind::Withdrawal:
      if (!f.ever_exposed || f.exposed_now) return never;
      return {false, true, f.since_last, f.since_last};
    case ModelKind::Delayed:
    case ModelKind::Decaying:
    case ModelKind::DelayedDecaying:
    case ModelKind::LongTerm:
      if (!f.ever_exposed) return never;
      if (f.since_first == 0) return {true, true, 0, 0};
      return {false, true, f.since_first, 1};
    case ModelKind::Past:
      if (!f.ever_exposed) return never;
      return {f.since_last == 0, true, f.since_last, f.since_last};
  }
  return f;
}

}  // namespace adrsig
