#pragma once

// Text formats shared by the CLI: number formatting, argument shorthands,
// CSV rows and key=value manifests.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "adra/error.hpp"

namespace adra::io {

// Shortest decimal form that round-trips; stable across runs and platforms.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + ": cannot parse '" + s + "' as a number");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidArgument(std::string(what) + ": cannot parse '" + s + "' as an integer");
  }
  return v;
}

// "0.04" or "c/N" (e.g. "1.5/N"), the latter scaled by the network size.
inline double parse_probability(std::string_view text, int n_devices) {
  const std::string s = trim(text);
  if (s.size() > 2 && (s.ends_with("/N") || s.ends_with("/n"))) {
    if (n_devices < 1) throw InvalidArgument("p shorthand c/N needs a network size");
    return parse_double(std::string_view(s).substr(0, s.size() - 2), "p") / n_devices;
  }
  return parse_double(s, "p");
}

// "a..b", "a..b:step", "a,b,c" or a single integer.
inline std::vector<int> parse_int_list(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::vector<int> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const std::string_view sv(s);
    const auto colon = s.find(':', dots);
    const auto first = parse_int(sv.substr(0, dots), what);
    const auto last = parse_int(sv.substr(dots + 2, colon == std::string::npos ? std::string::npos
                                                                               : colon - dots - 2),
                                what);
    const auto stride = colon == std::string::npos ? 1 : parse_int(sv.substr(colon + 1), what);
    if (stride < 1 || last < first) {
      throw InvalidArgument(std::string(what) + ": empty or malformed range '" + s + "'");
    }
    for (auto v = first; v <= last; v += stride) out.push_back(static_cast<int>(v));
    return out;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos
                                                                                   : comma - start);
    out.push_back(static_cast<int>(parse_int(piece, what)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    out.push_back(parse_double(std::string_view(s).substr(start, comma == std::string::npos
                                                                     ? std::string::npos
                                                                     : comma - start),
                               what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

// Ordered key=value lines. Values run to end of line; keys may not contain '='.
class Manifest {
 public:
  void set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(std::move(key), std::move(value));
  }

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << '=' << v << '\n';
  }

  static Manifest parse(std::istream& is) {
    Manifest m;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw InvalidArgument("manifest line is not key=value: '" + line + "'");
      }
      m.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace adra::io
