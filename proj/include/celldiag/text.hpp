#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace celldiag {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Case-insensitive key with spaces and underscores removed; used wherever
/// attribute or column names are matched ("Handover Success Rate" and
/// "handover_success_rate" normalize to the same key).
std::string normalize_name(std::string_view s);

std::vector<std::string> split_on(std::string_view s, char sep);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Fixed two-decimal rendering for human-facing tables.
std::string format_fixed2(double value);

/// Strict full-token double parse; returns false on trailing garbage.
bool parse_double(std::string_view token, double& out);

bool starts_with_ci(std::string_view s, std::string_view prefix);

} // namespace celldiag
