#include "cexdex/calendar.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace cexdex {

namespace {
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}
}  // namespace

std::int64_t utc_day(TimestampMs ts) { return floor_div(ts, kMsPerDay); }

std::int64_t iso_week_start(std::int64_t day) {
  // 1970-01-01 was a Thursday, three days after a Monday.
  return day - (day + 3 - 7 * floor_div(day + 3, 7));
}

std::string iso_date(std::int64_t day) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::int64_t parse_iso_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  const std::string s(text);
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw std::invalid_argument("not a YYYY-MM-DD date: '" + s + "'");
  }
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("no such date: '" + s + "'");
  return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace cexdex
