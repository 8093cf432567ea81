#include "adrsig/key_value.hpp"

#include <charconv>
#include <istream>
#include <stdexcept>

namespace adrsig {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    }
    out.push_back({trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line_no});
  }
  return out;
}

double parse_real(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not an integer: '" + text + "'");
  return v;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(" \t,", pos);
    if (start == std::string::npos) break;
    auto end = text.find_first_of(" \t,", start);
    if (end == std::string::npos) end = text.size();
    values.push_back(parse_real(text.substr(start, end - start)));
    pos = end;
  }
  if (values.empty()) throw std::invalid_argument("empty list");
  return values;
}

}  // namespace adrsig
