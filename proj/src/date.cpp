#include "terraseg/date.hpp"

#include <cstdio>

#include "terraseg/error.hpp"

namespace terraseg {

bool valid_date(const Date& d) {
  if (d.month < 1 || d.month > 12) return false;
  if (d.day < 1) return false;
  return d.ymd().ok();
}

Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, day = 1;
  char extra = 0;
  int n = std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &day, &extra);
  if (n == 2) {
    day = 1;
  } else if (n != 3) {
    fail(ErrorCode::Parse, "bad date '" + text + "', expected YYYY-MM-DD");
  }
  Date d{y, m, day};
  if (!valid_date(d)) fail(ErrorCode::Parse, "invalid calendar date '" + text + "'");
  return d;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

Date add_months(const Date& d, int months) {
  int idx = d.month_index() + months;
  int y = idx >= 0 ? idx / 12 : (idx - 11) / 12;
  unsigned m = static_cast<unsigned>(idx - y * 12) + 1;
  Date out{y, m, d.day};
  // clamp to the target month's length (e.g. Jan 31 + 1 month -> Feb 28/29)
  while (out.day > 28 && !out.ymd().ok()) --out.day;
  return out;
}

Date first_day_of_month(const Date& d) { return Date{d.year, d.month, 1}; }

Date last_day_of_month(const Date& d) {
  using namespace std::chrono;
  year_month_day_last l = year{d.year} / month{d.month} / last;
  return Date{d.year, d.month, static_cast<unsigned>(l.day())};
}

}  // namespace terraseg
