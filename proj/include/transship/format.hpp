#pragma once

// Text formatting shared by the CSV, JSON, SVG and LP writers. Output must be
// byte-deterministic, so everything goes through snprintf with fixed formats.

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace transship {

/// %.{digits}g; negative zero is printed as 0.
inline std::string format_number(double v, int digits = 12) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Key/value lines that head every output file (resolved config, tool version).
struct Metadata {
  std::vector<std::pair<std::string, std::string>> entries;

  Metadata& add(std::string key, std::string value) {
    entries.emplace_back(std::move(key), std::move(value));
    return *this;
  }

  /// One line per entry, each prefixed with `prefix` (e.g. "# " or "\\ ").
  void write_comment_block(std::ostream& os, std::string_view prefix) const {
    for (const auto& [k, v] : entries) {
      os << prefix << k << " = ";
      for (char ch : v) os << (ch == '\n' ? ' ' : ch);
      os << '\n';
    }
  }
};

inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace transship
