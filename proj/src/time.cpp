#include "decline/time.hpp"

#include <cstdio>
#include <stdexcept>

namespace decline {
namespace {

using namespace std::chrono;

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width, std::string_view what) {
  if (pos + width > text.size()) {
    throw std::invalid_argument("truncated " + std::string(what) + " in '" + std::string(text) + "'");
  }
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') {
      throw std::invalid_argument("bad " + std::string(what) + " in '" + std::string(text) + "'");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
  }
}

}  // namespace

Month Month::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') {
    throw std::invalid_argument("month must be YYYY-MM, got '" + std::string(text) + "'");
  }
  const int y = parse_fixed(text, 0, 4, "year");
  const int m = parse_fixed(text, 5, 2, "month");
  if (m < 1 || m > 12) {
    throw std::invalid_argument("month out of range in '" + std::string(text) + "'");
  }
  return Month(y, static_cast<unsigned>(m));
}

Month Month::of(Timestamp t) {
  const year_month_day ymd{floor<days>(t)};
  return Month(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
}

Timestamp Month::begin() const {
  const sys_days d{std::chrono::year{year()} / std::chrono::month{month()} / 1};
  return Timestamp{d};
}

std::string Month::to_string() const {
  char buf[16];
  const int y = year();
  std::snprintf(buf, sizeof buf, "%s%04d-%02u", y < 0 ? "-" : "", y < 0 ? -y : y, month());
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)
  const int y = parse_fixed(text, 0, 4, "year");
  expect_char(text, 4, '-');
  const int mo = parse_fixed(text, 5, 2, "month");
  expect_char(text, 7, '-');
  const int d = parse_fixed(text, 8, 2, "day");
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != 't' && text[10] != ' ')) {
    throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
  }
  const int hh = parse_fixed(text, 11, 2, "hour");
  expect_char(text, 13, ':');
  const int mm = parse_fixed(text, 14, 2, "minute");
  expect_char(text, 16, ':');
  const int ss = parse_fixed(text, 17, 2, "second");
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) throw std::invalid_argument("empty fraction in '" + std::string(text) + "'");
  }
  int offset_minutes = 0;
  if (pos >= text.size()) throw std::invalid_argument("missing zone in '" + std::string(text) + "'");
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    const int oh = parse_fixed(text, pos + 1, 2, "offset");
    expect_char(text, pos + 3, ':');
    const int om = parse_fixed(text, pos + 4, 2, "offset");
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw std::invalid_argument("bad zone in '" + std::string(text) + "'");
  }
  if (pos != text.size()) throw std::invalid_argument("trailing data in '" + std::string(text) + "'");

  const year_month_day ymd{year{y}, std::chrono::month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw std::invalid_argument("timestamp out of range '" + std::string(text) + "'");
  }
  return Timestamp{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
}

std::string format_rfc3339(Timestamp t) {
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace decline
