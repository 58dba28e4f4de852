#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>

namespace terraseg {

// Calendar date (UTC, day resolution). Scene timestamps and label months are
// day-dated; month arithmetic drives the temporal windows.
struct Date {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;

  int month_index() const { return year * 12 + static_cast<int>(month) - 1; }

  std::chrono::year_month_day ymd() const {
    return std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
  }
};

// Strict "YYYY-MM-DD" (or "YYYY-MM", day defaulting to 1). Throws Error{Parse}.
Date parse_date(const std::string& text);

std::string format_date(const Date& d);

bool valid_date(const Date& d);

// months may be negative.
Date add_months(const Date& d, int months);

Date first_day_of_month(const Date& d);
Date last_day_of_month(const Date& d);

}  // namespace terraseg
