#pragma once

// Small text helpers used by the readers and writers. All delimited output
// uses ';' and '\n'; numbers are written in shortest round-trip form.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fnmatch.h>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace perftidy::text {

inline std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

/// One non-comment, non-blank line of a delimited input, with its 1-based line number.
struct Record {
  std::size_t line;
  std::vector<std::string_view> fields;
};

/// Splits `input` into ';'-delimited records, skipping '#' comments and blank lines.
/// Fields are trimmed. The views point into `input`.
inline std::vector<Record> records(std::string_view input) {
  std::vector<Record> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < input.size()) {
    auto end = input.find('\n', pos);
    if (end == std::string_view::npos) end = input.size();
    std::string_view line = input.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, ';');
    for (auto& f : fields) f = trim(f);
    out.push_back({line_no, std::move(fields)});
  }
  return out;
}

/// Strict finite double parse; nullopt on trailing junk, NaN or infinity.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Shell-style glob match ('*', '?', '[...]').
inline bool glob_match(const std::string& pattern, const std::string& name) {
  return ::fnmatch(pattern.c_str(), name.c_str(), 0) == 0;
}

}  // namespace perftidy::text
