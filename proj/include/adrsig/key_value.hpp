#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adrsig {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Reads `key = value` lines. Blank lines and `#` comments are skipped; the
/// value is everything after the first '=' with surrounding blanks trimmed.
/// Throws std::invalid_argument on a line without '='.
std::vector<KeyValue> parse_key_values(std::istream& in);

/// Comma- or blank-separated list of reals.
std::vector<double> parse_real_list(const std::string& text);
double parse_real(const std::string& text);
long long parse_integer(const std::string& text);

}  // namespace adrsig
