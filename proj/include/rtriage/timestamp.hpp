#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace rtriage {

using Timestamp = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ", always UTC.
std::string format_rfc3339(Timestamp t);

/// Accepts a trailing 'Z' or a numeric "+hh:mm"/"-hh:mm" offset; fractional
/// seconds are truncated.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

} // namespace rtriage
