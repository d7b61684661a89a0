#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace epirenew {

/// Shortest round-trip decimal form; locale-independent.
std::string format_double(double v);

/// Strict, locale-independent parse of a full token. Throws on trailing junk.
double parse_double(std::string_view token, std::string_view context = "");

long parse_long(std::string_view token, std::string_view context = "");

std::vector<std::string> split_csv_line(std::string_view line);

std::string join_csv(const std::vector<std::string>& fields);

/// Trim ASCII whitespace (incl. trailing CR from CRLF files).
std::string_view trim(std::string_view s);

}  // namespace epirenew
