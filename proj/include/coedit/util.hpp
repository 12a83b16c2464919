#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coedit {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

// Accepts integer UTC seconds or an ISO date "YYYY-MM-DD[THH:MM:SS[Z]]".
std::optional<std::int64_t> parse_time(std::string_view s);
std::string format_utc(std::int64_t seconds);

// 0 = Monday ... 6 = Sunday
int utc_weekday(std::int64_t seconds);

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

// RFC-4180 field quoting.
std::string csv_field(std::string_view s);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Escapes <, > and & for HTML text content.
std::string html_escape(std::string_view s);

// Shortest round-trip representation of a double.
std::string format_double(double v);

} // namespace coedit
