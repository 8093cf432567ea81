#include "adrsig/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace adrsig {

namespace {

void check_binary(const BinarySeries& series, const std::string& id, const char* what) {
  for (auto v : series) {
    if (v > 1) {
      throw std::invalid_argument("patient " + id + ": " + what + " series is not binary");
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw CohortError("line " + std::to_string(line_no) + ": " + msg);
}

std::uint8_t parse_flag(std::string_view field, std::size_t line_no, const char* column) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  fail(line_no, std::string("non-binary ") + column + " value '" + std::string(field) + "'");
}

}  // namespace

Cohort::Cohort(std::vector<PatientRecord> patients, PairLabel label)
    : patients_(std::move(patients)), label_(std::move(label)) {
  if (patients_.empty()) {
    throw std::invalid_argument("cohort must contain at least one patient");
  }
  std::unordered_set<std::string> seen;
  for (const auto& p : patients_) {
    if (!seen.insert(p.id).second) {
      throw std::invalid_argument("duplicate patient id " + p.id);
    }
    if (p.exposure.empty()) {
      throw std::invalid_argument("patient " + p.id + " has no time points");
    }
    if (p.exposure.size() != p.adr.size()) {
      throw std::invalid_argument("patient " + p.id + ": exposure and ADR lengths differ");
    }
    check_binary(p.exposure, p.id, "exposure");
    check_binary(p.adr, p.id, "ADR");
    total_cells_ += p.length();
    max_length_ = std::max(max_length_, p.length());
    total_adr_ += static_cast<std::size_t>(std::count(p.adr.begin(), p.adr.end(), 1));
  }
}

ExposureFeatures FeatureTracker::advance(bool exposed) noexcept {
  if (current_.ever_exposed) {
    ++current_.since_first;
    ++current_.since_last;
  }
  current_.exposed_now = exposed;
  if (exposed) {
    current_.ever_exposed = true;
    current_.since_last = 0;
  }
  return current_;
}

ExposureFeatures features_at(std::span<const std::uint8_t> exposure, std::size_t t) {
  if (t < 1 || t > exposure.size()) {
    throw std::out_of_range("time index " + std::to_string(t) + " outside 1.." +
                            std::to_string(exposure.size()));
  }
  FeatureTracker tracker;
  ExposureFeatures f;
  for (std::size_t i = 0; i < t; ++i) f = tracker.advance(exposure[i] != 0);
  return f;
}

ContingencyCounts contingency_current(const Cohort& cohort) {
  ContingencyCounts counts;
  for (const auto& patient : cohort.patients()) {
    for (std::size_t t = 0; t < patient.length(); ++t) {
      const bool x = patient.exposure[t] != 0;
      const bool y = patient.adr[t] != 0;
      if (x) {
        (y ? counts.a : counts.b) += 1;
      } else {
        (y ? counts.c : counts.d) += 1;
      }
    }
  }
  return counts;
}

namespace detail {

ContingencyCounts contingency_window(const Cohort& cohort, int p) {
  ContingencyCounts counts;
  for (const auto& patient : cohort.patients()) {
    FeatureTracker tracker;
    for (std::size_t t = 0; t < patient.length(); ++t) {
      const auto f = tracker.advance(patient.exposure[t] != 0);
      // Exposure somewhere in the last p+1 points <=> most recent exposure within p steps.
      const bool in_window = f.ever_exposed && f.since_last <= p;
      const bool y = patient.adr[t] != 0;
      if (in_window) {
        (y ? counts.a : counts.b) += 1;
      } else {
        (y ? counts.c : counts.d) += 1;
      }
    }
  }
  return counts;
}

}  // namespace detail

ContingencyCounts contingency_past(const Cohort& cohort, int p) {
  const auto max_p = static_cast<long long>(cohort.max_length()) - 1;
  if (p < 1 || p > max_p) {
    throw std::out_of_range("past window p=" + std::to_string(p) + " outside 1.." +
                            std::to_string(max_p));
  }
  return detail::contingency_window(cohort, p);
}

Cohort parse_cohort(std::istream& in, PairLabel label) {
  std::string line;
  std::size_t line_no = 0;

  // Header.
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4 || fields[0] != "patient_id" || fields[1] != "t" ||
        fields[2] != "exposed" || fields[3] != "adr") {
      fail(line_no, "expected header 'patient_id,t,exposed,adr'");
    }
    have_header = true;
    break;
  }
  if (!have_header) throw CohortError("missing header");

  struct Rows {
    std::map<long long, std::pair<std::uint8_t, std::uint8_t>> by_time;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Rows> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      fail(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail(line_no, "empty patient_id");
    long long t = 0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), t);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size()) {
      fail(line_no, "malformed time index '" + std::string(fields[1]) + "'");
    }
    if (t < 1) fail(line_no, "time index must be >= 1");
    const auto x = parse_flag(fields[2], line_no, "exposed");
    const auto y = parse_flag(fields[3], line_no, "adr");

    std::string id(fields[0]);
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.by_time.emplace(t, std::make_pair(x, y)).second) {
      fail(line_no, "duplicate row for patient " + id + " at t=" + std::to_string(t));
    }
  }

  if (order.empty()) throw CohortError("no data rows: a cohort needs at least one patient");

  std::vector<PatientRecord> patients;
  patients.reserve(order.size());
  for (const auto& id : order) {
    const auto& by_time = rows.at(id).by_time;
    PatientRecord rec;
    rec.id = id;
    long long expected = 1;
    for (const auto& [t, xy] : by_time) {
      if (t != expected) {
        throw CohortError("patient " + id + ": gap in time index at t=" + std::to_string(expected));
      }
      rec.exposure.push_back(xy.first);
      rec.adr.push_back(xy.second);
      ++expected;
    }
    patients.push_back(std::move(rec));
  }
  return Cohort(std::move(patients), std::move(label));
}

Cohort read_cohort_file(const std::string& path, PairLabel label) {
  std::ifstream in(path);
  if (!in) throw CohortError("cannot open " + path);
  return parse_cohort(in, std::move(label));
}

void write_cohort_csv(std::ostream& out, const Cohort& cohort) {
  out << "patient_id,t,exposed,adr\n";
  for (const auto& p : cohort.patients()) {
    for (std::size_t t = 0; t < p.length(); ++t) {
      out << p.id << ',' << (t + 1) << ',' << int(p.exposure[t]) << ',' << int(p.adr[t]) << '\n';
    }
  }
}

void write_bitstrings(std::ostream& out, const Cohort& cohort) {
  for (const auto& p : cohort.patients()) {
    out << p.id << ' ';
    for (auto v : p.exposure) out << char('0' + v);
    out << ' ';
    for (auto v : p.adr) out << char('0' + v);
    out << '\n';
  }
}

}  // namespace adrsig
