#pragma once

#include "cexdex/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace cexdex {

inline constexpr std::int64_t kMsPerDay = 86'400'000;

/// Days since 1970-01-01 (UTC calendar day containing `ts`).
std::int64_t utc_day(TimestampMs ts);

/// First day (Monday) of the ISO week containing `day`.
std::int64_t iso_week_start(std::int64_t day);

/// "YYYY-MM-DD".
std::string iso_date(std::int64_t day);

/// Inverse of iso_date. Throws std::invalid_argument on a malformed or
/// nonexistent date.
std::int64_t parse_iso_date(std::string_view text);

}  // namespace cexdex
