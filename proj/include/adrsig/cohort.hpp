#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrsig {

/// Raised for malformed cohort input (bad rows, gaps, duplicates, empty data).
class CohortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Identifies the single drug-ADR pair a cohort describes.
struct PairLabel {
  std::string drug;
  std::string adr;

  friend bool operator==(const PairLabel&, const PairLabel&) = default;
};

using BinarySeries = std::vector<std::uint8_t>;

/// One patient's paired exposure / ADR series over T_k consecutive time points.
struct PatientRecord {
  std::string id;
  BinarySeries exposure;
  BinarySeries adr;

  std::size_t length() const noexcept { return exposure.size(); }

  friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

/// Immutable collection of patients for one drug-ADR pair.
///
/// Construction enforces: at least one patient, unique ids, equal-length
/// exposure and ADR series of length >= 1, entries in {0,1}.
class Cohort {
 public:
  Cohort(std::vector<PatientRecord> patients, PairLabel label);

  const std::vector<PatientRecord>& patients() const noexcept { return patients_; }
  const PairLabel& label() const noexcept { return label_; }

  std::size_t size() const noexcept { return patients_.size(); }
  std::size_t total_cells() const noexcept { return total_cells_; }
  std::size_t max_length() const noexcept { return max_length_; }
  std::size_t total_adr() const noexcept { return total_adr_; }

  friend bool operator==(const Cohort&, const Cohort&) = default;

 private:
  std::vector<PatientRecord> patients_;
  PairLabel label_;
  std::size_t total_cells_ = 0;
  std::size_t max_length_ = 0;
  std::size_t total_adr_ = 0;
};

/// Exposure-history summary at one time point. The integer fields are only
/// meaningful when ever_exposed is set; otherwise they are held at 0 so that
/// equal histories compare equal.
struct ExposureFeatures {
  bool exposed_now = false;
  bool ever_exposed = false;
  int since_first = 0;  // t - first exposed time point
  int since_last = 0;   // t - most recent exposed time point, 0 while exposed

  friend auto operator<=>(const ExposureFeatures&, const ExposureFeatures&) = default;
};

/// Features of exposure(1:t), with t 1-based. Throws std::out_of_range.
ExposureFeatures features_at(std::span<const std::uint8_t> exposure, std::size_t t);

/// Incremental form of features_at: feed one time point at a time.
class FeatureTracker {
 public:
  ExposureFeatures advance(bool exposed) noexcept;

 private:
  ExposureFeatures current_;
};

/// 2x2 patient-time cell counts: (exposed, ADR), (exposed, no ADR),
/// (unexposed, ADR), (unexposed, no ADR).
struct ContingencyCounts {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  std::uint64_t d = 0;

  std::uint64_t total() const noexcept { return a + b + c + d; }

  friend bool operator==(const ContingencyCounts&, const ContingencyCounts&) = default;
};

/// Exposure criterion X(t) = 1.
ContingencyCounts contingency_current(const Cohort& cohort);

/// Exposure criterion: exposed at some tau in {max(1, t-p), ..., t}.
/// Requires 1 <= p <= max_k T_k - 1; throws std::out_of_range otherwise.
ContingencyCounts contingency_past(const Cohort& cohort, int p);

namespace detail {
/// Window counts without the range check, so p = 0 is accepted.
ContingencyCounts contingency_window(const Cohort& cohort, int p);
}  // namespace detail

/// Reads the long CSV format `patient_id,t,exposed,adr` (header required, t
/// 1-based, rows in any order). Patients keep their first-appearance order.
Cohort parse_cohort(std::istream& in, PairLabel label);
Cohort read_cohort_file(const std::string& path, PairLabel label);

void write_cohort_csv(std::ostream& out, const Cohort& cohort);

/// Debug dump: one line per patient, `id exposure-bits adr-bits`.
void write_bitstrings(std::ostream& out, const Cohort& cohort);

}  // namespace adrsig
