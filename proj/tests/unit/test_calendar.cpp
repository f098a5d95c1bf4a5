#include "doctest.h"

#include <ctime>
#include <cstdint>

#include "psm/calendar.hpp"

using namespace psm;

namespace {

// Independent oracle: glibc's UTC calendar. timegm/gmtime_r implement the
// same proleptic Gregorian rules for the epoch range we care about.
std::int64_t libc_epoch(int year, int month, int day, int hour, int minute,
                        int second) {
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  return static_cast<std::int64_t>(timegm(&tm));
}

}  // namespace

TEST_CASE("epoch conversion matches libc for known dates") {
  struct Row {
    int y, mo, d, h, mi, s;
  };
  const Row rows[] = {
      {1970, 1, 1, 0, 0, 0},    {1993, 10, 1, 0, 0, 3},
      {2000, 2, 29, 12, 0, 0},  {1999, 12, 31, 23, 59, 59},
      {2024, 2, 29, 6, 30, 15}, {1980, 6, 15, 3, 4, 5},
      {2038, 1, 19, 3, 14, 8},  {1972, 2, 29, 0, 0, 0},
  };
  for (const auto& r : rows) {
    DateTime dt{r.y, r.mo, r.d, r.h, r.mi, r.s};
    CHECK(to_epoch_seconds(dt) == libc_epoch(r.y, r.mo, r.d, r.h, r.mi, r.s));
  }
}

TEST_CASE("round trip over a multi-year sweep") {
  // Step by a prime number of seconds so hours/days/months all churn.
  for (std::int64_t t = 0; t < 40LL * 365 * 86400; t += 8641237) {
    DateTime dt = from_epoch_seconds(t);
    CHECK(to_epoch_seconds(dt) == t);
    std::tm tm{};
    time_t tt = static_cast<time_t>(t);
    gmtime_r(&tt, &tm);
    CHECK(dt.year == tm.tm_year + 1900);
    CHECK(dt.month == tm.tm_mon + 1);
    CHECK(dt.day == tm.tm_mday);
    CHECK(dt.hour == tm.tm_hour);
    CHECK(dt.minute == tm.tm_min);
    CHECK(dt.second == tm.tm_sec);
  }
}

TEST_CASE("weekday uses Monday = 0") {
  // 1970-01-01 was a Thursday.
  CHECK(weekday(0) == 3);
  // 1993-10-01 was a Friday.
  CHECK(weekday(to_epoch_seconds({1993, 10, 1, 0, 0, 0})) == 4);
  CHECK(is_weekend(to_epoch_seconds({1993, 10, 2, 10, 0, 0})));
  CHECK(is_weekend(to_epoch_seconds({1993, 10, 3, 10, 0, 0})));
  CHECK_FALSE(is_weekend(to_epoch_seconds({1993, 10, 4, 10, 0, 0})));
}

TEST_CASE("days_from_civil inverts civil_from_days") {
  for (std::int64_t d = -200000; d <= 200000; d += 373) {
    int y, m, day;
    civil_from_days(d, y, m, day);
    CHECK(days_from_civil(y, m, day) == d);
  }
}

TEST_CASE("format and parse round trip") {
  const std::int64_t t = to_epoch_seconds({1993, 10, 1, 0, 0, 3});
  CHECK(format_datetime(t) == "1993-10-01 00:00:03");
  auto parsed = parse_datetime("1993-10-01 00:00:03");
  REQUIRE(parsed.has_value());
  CHECK(*parsed == t);
}

TEST_CASE("parse accepts archive style and bare epochs") {
  auto archive = parse_datetime("Fri Oct  1 00:00:03 PDT 1993");
  REQUIRE(archive.has_value());
  CHECK(*archive == to_epoch_seconds({1993, 10, 1, 0, 0, 3}));

  auto bare = parse_datetime("749433603");
  REQUIRE(bare.has_value());
  CHECK(*bare == 749433603);

  CHECK_FALSE(parse_datetime("not a date").has_value());
  CHECK_FALSE(parse_datetime("").has_value());
  CHECK_FALSE(parse_datetime("1993-13-01 00:00:00").has_value());
}
