#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mradlab {

// Mean Gregorian year length used for every age computation.
inline constexpr double kDaysPerYear = 365.2425;

// Proleptic Gregorian calendar date.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;
};

bool is_valid(const Date& date);

// Days since 1970-01-01 (negative before).
std::int64_t to_day_number(const Date& date);
Date from_day_number(std::int64_t days);

// Strict YYYY-MM-DD. Throws InvalidArgument on anything else.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

// Exact (leap-aware) day count divided by kDaysPerYear.
// Throws InvalidArgument when death precedes birth.
double age_at_death(const Date& birth, const Date& death);

}  // namespace mradlab
