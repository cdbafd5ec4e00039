#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace optnet::text {

/// 17 significant digits; parse_double(format_double(x)) == x for finite x.
std::string format_double(double x);

/// Whole-token parse; throws FormatError on junk or trailing characters.
double parse_double(std::string_view token);
std::uint64_t parse_u64(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Parses "key=value" tokens separated by spaces (used by file headers).
/// Returns the value for `key`, throwing FormatError when absent.
std::string header_value(std::string_view header, std::string_view key);

}  // namespace optnet::text
