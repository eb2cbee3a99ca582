#include "mradlab/dates.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "mradlab/errors.hpp"

namespace mradlab {
namespace {

std::chrono::year_month_day to_ymd(const Date& d) {
  return std::chrono::year{d.year} / std::chrono::month{d.month} /
         std::chrono::day{d.day};
}

bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

bool is_valid(const Date& date) { return to_ymd(date).ok(); }

std::int64_t to_day_number(const Date& date) {
  if (!is_valid(date)) {
    throw InvalidArgument("invalid calendar date " + format_iso_date(date));
  }
  return std::chrono::sys_days{to_ymd(date)}.time_since_epoch().count();
}

Date from_day_number(std::int64_t days) {
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days}}};
  return Date{static_cast<int>(ymd.year()),
              static_cast<unsigned>(ymd.month()),
              static_cast<unsigned>(ymd.day())};
}

Date parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw InvalidArgument("expected YYYY-MM-DD, got '" + std::string(text) +
                          "'");
  }
  int y = 0;
  int m = 0;
  int d = 0;
  if (!parse_digits(text.substr(0, 4), y) ||
      !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    throw InvalidArgument("non-numeric date '" + std::string(text) + "'");
  }
  const Date date{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
  if (!is_valid(date)) {
    throw InvalidArgument("no such calendar date '" + std::string(text) + "'");
  }
  return date;
}

std::string format_iso_date(const Date& date) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", date.year, date.month,
                date.day);
  return buf;
}

double age_at_death(const Date& birth, const Date& death) {
  const auto span = to_day_number(death) - to_day_number(birth);
  if (span < 0) {
    throw InvalidArgument("death date " + format_iso_date(death) +
                          " precedes birth date " + format_iso_date(birth));
  }
  return static_cast<double>(span) / kDaysPerYear;
}

}  // namespace mradlab
