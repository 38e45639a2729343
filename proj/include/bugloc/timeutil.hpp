#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bugloc {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

constexpr double kSecondsPerDay = 86400.0;

/// Parses an RFC 3339 timestamp ("2020-03-01T12:30:00Z", fractional seconds
/// and numeric offsets accepted). Returns nullopt on malformed input.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Formats a timestamp as RFC 3339 UTC with a trailing 'Z'.
std::string format_rfc3339(Timestamp t);

/// Real-valued days between two instants (later - earlier).
inline double days_between(Timestamp earlier, Timestamp later) {
    return static_cast<double>(later - earlier) / kSecondsPerDay;
}

}  // namespace bugloc
