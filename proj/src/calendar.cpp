#include "psm/calendar.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <string_view>

namespace psm {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = static_cast<int>(y + (month <= 2));
}

std::int64_t to_epoch_seconds(const DateTime& dt) {
  return days_from_civil(dt.year, dt.month, dt.day) * 86400 + dt.hour * 3600 +
         dt.minute * 60 + dt.second;
}

DateTime from_epoch_seconds(std::int64_t seconds) {
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  DateTime dt;
  civil_from_days(days, dt.year, dt.month, dt.day);
  dt.hour = static_cast<int>(rem / 3600);
  dt.minute = static_cast<int>((rem % 3600) / 60);
  dt.second = static_cast<int>(rem % 60);
  return dt;
}

int weekday(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds % 86400 < 0) days -= 1;
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  std::int64_t w = (days + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

bool is_weekend(std::int64_t epoch_seconds) { return weekday(epoch_seconds) >= 5; }

std::string format_datetime(std::int64_t epoch_seconds) {
  const DateTime dt = from_epoch_seconds(epoch_seconds);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", dt.year, dt.month,
                dt.day, dt.hour, dt.minute, dt.second);
  return buf;
}

namespace {

int month_from_abbrev(std::string_view abbrev) {
  static constexpr std::array<std::string_view, 12> names = {
      "Jan", "Feb", "Mar", "Apr", "May", "Jun",
      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  for (int i = 0; i < 12; ++i) {
    if (names[static_cast<std::size_t>(i)] == abbrev) return i + 1;
  }
  return 0;
}

bool valid_fields(const DateTime& dt) {
  if (dt.month < 1 || dt.month > 12 || dt.day < 1) return false;
  static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  int limit = lengths[static_cast<std::size_t>(dt.month - 1)];
  const bool leap = dt.year % 4 == 0 && (dt.year % 100 != 0 || dt.year % 400 == 0);
  if (dt.month == 2 && leap) limit = 29;
  if (dt.day > limit) return false;
  return dt.hour >= 0 && dt.hour < 24 && dt.minute >= 0 && dt.minute < 60 &&
         dt.second >= 0 && dt.second < 60;
}

}  // namespace

std::optional<std::int64_t> parse_datetime(const std::string& text) {
  DateTime dt;
  if (std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d", &dt.year, &dt.month, &dt.day,
                  &dt.hour, &dt.minute, &dt.second) == 6) {
    if (valid_fields(dt)) return to_epoch_seconds(dt);
    return std::nullopt;
  }
  char wday[8] = {0};
  char mon[8] = {0};
  char zone[16] = {0};
  if (std::sscanf(text.c_str(), "%3s %3s %d %d:%d:%d %15s %d", wday, mon, &dt.day,
                  &dt.hour, &dt.minute, &dt.second, zone, &dt.year) == 8) {
    dt.month = month_from_abbrev(mon);
    if (dt.month != 0 && valid_fields(dt)) return to_epoch_seconds(dt);
  }
  // Bare epoch integer.
  bool digits = !text.empty();
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      digits = false;
      break;
    }
  }
  if (digits) {
    long long value = 0;
    if (std::sscanf(text.c_str(), "%lld", &value) == 1) return value;
  }
  return std::nullopt;
}

}  // namespace psm
