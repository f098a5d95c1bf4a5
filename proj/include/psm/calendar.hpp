#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace psm {

// Minimal UTC-naive civil calendar support for trace timestamps. Keeps the
// project independent of the host timezone database: every conversion is pure
// integer arithmetic on the proleptic Gregorian calendar.

struct DateTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
};

// Days since 1970-01-01 for a civil date (valid far beyond any trace range).
std::int64_t days_from_civil(int year, int month, int day);

// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

std::int64_t to_epoch_seconds(const DateTime& dt);
DateTime from_epoch_seconds(std::int64_t seconds);

// Day of week with Monday = 0 ... Sunday = 6.
int weekday(std::int64_t epoch_seconds);

bool is_weekend(std::int64_t epoch_seconds);

// Formats as "YYYY-MM-DD HH:MM:SS".
std::string format_datetime(std::int64_t epoch_seconds);

// Accepts "YYYY-MM-DD HH:MM:SS", the classic archive style
// "Fri Oct 01 00:00:03 PDT 1993" (zone name ignored, time read as written),
// or a bare integer epoch value.
std::optional<std::int64_t> parse_datetime(const std::string& text);

}  // namespace psm
