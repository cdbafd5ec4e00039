#include "optnet/util/text.hpp"

#include <charconv>
#include <cmath>

#include "optnet/math/errors.hpp"

namespace optnet::text {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  token = trim(token);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || token.empty()) {
    throw FormatError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view token) {
  token = trim(token);
  std::uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || token.empty()) {
    throw FormatError("not an unsigned integer: '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string header_value(std::string_view header, std::string_view key) {
  for (auto token : split(header, ' ')) {
    token = trim(token);
    const auto eq = token.find('=');
    if (eq != std::string_view::npos && token.substr(0, eq) == key) {
      return std::string(token.substr(eq + 1));
    }
  }
  throw FormatError("header lacks '" + std::string(key) + "'");
}

}  // namespace optnet::text
