#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "adrsig/cohort.hpp"

namespace adrsig {

/// The eight exposure models. Order is the canonical catalog order and is used
/// for deterministic tie-breaking.
enum class ModelKind : std::uint8_t {
  NoAssociation,
  CurrentUse,
  Withdrawal,
  Delayed,
  Decaying,
  DelayedDecaying,
  LongTerm,
  Past,
};

inline constexpr std::array<ModelKind, 8> kAllModelKinds{
    ModelKind::NoAssociation, ModelKind::CurrentUse, ModelKind::Withdrawal,
    ModelKind::Delayed,       ModelKind::Decaying,   ModelKind::DelayedDecaying,
    ModelKind::LongTerm,      ModelKind::Past,
};

constexpr std::size_t index_of(ModelKind kind) noexcept { return static_cast<std::size_t>(kind); }

std::string_view to_string(ModelKind kind) noexcept;
/// Accepts the names produced by to_string; throws std::invalid_argument.
ModelKind parse_model_kind(std::string_view name);

/// Continuous risk-function parameters, all strictly positive.
enum class RiskParam : std::uint8_t { Rho, Mu, Sigma, Kappa };

std::string_view to_string(RiskParam param) noexcept;

/// Continuous parameters of a kind, in the order the optimizer packs them.
std::span<const RiskParam> continuous_params(ModelKind kind) noexcept;

/// Whether the kind carries the discrete window parameter p.
constexpr bool has_window(ModelKind kind) noexcept { return kind == ModelKind::Past; }

/// Number of risk-function parameters q (discrete p included).
int param_count(ModelKind kind) noexcept;

/// A risk function together with its parameter values.
struct ModelSpec {
  ModelKind kind = ModelKind::NoAssociation;
  double rho = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double kappa = 0.0;
  int window = 0;   // p, Past only
  int horizon = 0;  // T; 0 = unknown. DelayedDecaying needs it for normalisation.

  double get(RiskParam param) const noexcept;
  void set(RiskParam param, double value) noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Throws std::invalid_argument if parameters are missing, non-positive, or
/// out of range for the kind.
void validate(const ModelSpec& spec);

/// Flat key-value text, e.g. `kind=delayed mu=2 sigma=2`.
std::string format_spec(const ModelSpec& spec);
/// Inverse of format_spec. `T=` sets the horizon. Throws std::invalid_argument.
ModelSpec parse_spec(std::string_view text);

/// max over s in {1..T-1} of exp(-((s-mu)/sigma)^2 / 2) + exp(-rho s).
double normalizing_constant(double mu, double sigma, double rho, int horizon);

/// Evaluates r_M for a fixed spec. Validates once on construction and caches
/// the DelayedDecaying normalisation.
class RiskFunction {
 public:
  explicit RiskFunction(const ModelSpec& spec);

  /// Assumes `f` is a coherent feature set (see validate(ExposureFeatures)).
  double operator()(const ExposureFeatures& f) const noexcept;

  const ModelSpec& spec() const noexcept { return spec_; }

 private:
  ModelSpec spec_;
  double inv_norm_ = 1.0;
};

void validate(const ExposureFeatures& f);

/// One-off evaluation with full validation of both arguments.
double risk(const ModelSpec& spec, const ExposureFeatures& f);

/// Projects features onto the fields the kind's risk function reads; two
/// histories with equal projections have equal risk for every parameter value.
ExposureFeatures risk_relevant(ModelKind kind, const ExposureFeatures& f) noexcept;

}  // namespace adrsig
