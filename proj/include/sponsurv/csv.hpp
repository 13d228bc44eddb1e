#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <sponsurv/error.hpp>

namespace sponsurv::csv {

// Minimal comma-separated parsing: plain tokens, no quoting/escaping.
// Fields in the panel and portfolio formats are identifiers and numbers.

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(begin));
      break;
    }
    out.emplace_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

inline double parse_double(const std::string& token, std::size_t row,
                           const std::string& column) {
  const std::string t = trim(token);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error::validation("InvalidValue",
                            "row " + std::to_string(row) + ", column '" + column +
                                "': cannot parse number from '" + t + "'");
  }
  return value;
}

inline long parse_long(const std::string& token, std::size_t row,
                       const std::string& column) {
  const std::string t = trim(token);
  long value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error::validation("InvalidValue",
                            "row " + std::to_string(row) + ", column '" + column +
                                "': cannot parse integer from '" + t + "'");
  }
  return value;
}

inline bool parse_bool01(const std::string& token, std::size_t row,
                         const std::string& column) {
  const std::string t = trim(token);
  if (t == "0") return false;
  if (t == "1") return true;
  throw Error::validation("InvalidValue",
                          "row " + std::to_string(row) + ", column '" + column +
                              "': expected 0 or 1, got '" + t + "'");
}

// Shortest representation that round-trips; keeps rendered files byte-stable.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return std::string(buf);
}

}  // namespace sponsurv::csv
