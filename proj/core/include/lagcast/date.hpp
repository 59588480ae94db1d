#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace lagcast {

/// A calendar day with no time-of-day or timezone.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days day) : day_(day) {}

  /// Throws InputError if the triple is not a valid Gregorian date.
  static Date from_ymd(int year, unsigned month, unsigned day);

  /// YYYY-MM-DD. Returns nullopt on any deviation from that exact layout.
  static std::optional<Date> parse_iso(std::string_view text);
  /// MM/DD/YYYY (one- or two-digit month and day accepted).
  static std::optional<Date> parse_us(std::string_view text);

  std::chrono::sys_days sys_days() const noexcept { return day_; }
  std::chrono::year_month_day ymd() const noexcept { return std::chrono::year_month_day{day_}; }
  /// Days since 1970-01-01.
  long long serial() const noexcept { return day_.time_since_epoch().count(); }
  /// 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const noexcept { return std::chrono::weekday{day_}.c_encoding(); }

  Date plus_days(long long n) const noexcept { return Date{day_ + std::chrono::days{n}}; }

  /// ISO 8601 rendering.
  std::string iso() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;
  friend constexpr bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days day_{};
};

}  // namespace lagcast
