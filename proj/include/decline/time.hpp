#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace decline {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::chrono::sys_seconds;

/// A UTC calendar month, stored as a dense index (year * 12 + month - 1)
/// so that consecutive months differ by exactly one.
class Month {
 public:
  constexpr Month() = default;
  constexpr Month(int year, unsigned month) : index_(year * 12 + static_cast<int>(month) - 1) {}

  static constexpr Month from_index(std::int32_t index) {
    Month m;
    m.index_ = index;
    return m;
  }

  /// Parses "YYYY-MM". Throws std::invalid_argument on malformed input.
  static Month parse(std::string_view text);

  /// The month containing the given instant.
  static Month of(Timestamp t);

  constexpr std::int32_t index() const { return index_; }
  constexpr int year() const { return floor_div(index_, 12); }
  constexpr unsigned month() const { return static_cast<unsigned>(index_ - floor_div(index_, 12) * 12 + 1); }

  /// First instant of this month.
  Timestamp begin() const;
  /// First instant of the following month; events strictly before it belong
  /// to this month or earlier.
  Timestamp end() const { return next().begin(); }

  constexpr Month next() const { return from_index(index_ + 1); }
  constexpr Month prev() const { return from_index(index_ - 1); }
  constexpr Month operator+(int n) const { return from_index(index_ + n); }
  constexpr Month operator-(int n) const { return from_index(index_ - n); }
  constexpr int operator-(Month other) const { return index_ - other.index_; }

  std::string to_string() const;

  constexpr auto operator<=>(const Month&) const = default;

 private:
  static constexpr int floor_div(int a, int b) { return (a >= 0) ? a / b : -((-a + b - 1) / b); }

  std::int32_t index_ = 0;
};

/// Parses an RFC 3339 timestamp ("2020-03-01T12:00:00.123Z", offsets allowed).
/// Fractional seconds are truncated. Throws std::invalid_argument.
Timestamp parse_rfc3339(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);

}  // namespace decline
