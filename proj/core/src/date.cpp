#include "lagcast/date.hpp"

#include <charconv>

#include <fmt/format.h>

#include "lagcast/error.hpp"

namespace lagcast {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::optional<Date> make(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  auto d = make(year, static_cast<int>(month), static_cast<int>(day));
  if (!d) throw InputError(fmt::format("invalid calendar date {}-{}-{}", year, month, day));
  return *d;
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  return make(to_int(y), to_int(m), to_int(d));
}

std::optional<Date> Date::parse_us(std::string_view text) {
  auto s1 = text.find('/');
  if (s1 == std::string_view::npos) return std::nullopt;
  auto s2 = text.find('/', s1 + 1);
  if (s2 == std::string_view::npos) return std::nullopt;
  auto m = text.substr(0, s1), d = text.substr(s1 + 1, s2 - s1 - 1), y = text.substr(s2 + 1);
  if (m.size() > 2 || d.size() > 2 || y.size() != 4) return std::nullopt;
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  return make(to_int(y), to_int(m), to_int(d));
}

std::string Date::iso() const {
  auto v = ymd();
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(v.year()), static_cast<unsigned>(v.month()),
                     static_cast<unsigned>(v.day()));
}

}  // namespace lagcast
