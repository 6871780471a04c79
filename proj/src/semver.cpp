#include "decline/semver.hpp"

#include <cctype>
#include <limits>

namespace decline {
namespace {

bool is_alnum_or_hyphen(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-';
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::uint64_t parse_number(std::string_view s, std::string_view whole) {
  if (!all_digits(s)) {
    throw UnparseableVersion("non-numeric version component in '" + std::string(whole) + "'");
  }
  std::uint64_t value = 0;
  for (char c : s) {
    const auto digit = static_cast<std::uint64_t>(c - '0');
    if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
      throw UnparseableVersion("version component overflow in '" + std::string(whole) + "'");
    }
    value = value * 10 + digit;
  }
  return value;
}

std::vector<SemVer::Identifier> parse_prerelease(std::string_view s, std::string_view whole) {
  std::vector<SemVer::Identifier> ids;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = s.find('.', start);
    const std::string_view part = s.substr(start, dot == std::string_view::npos ? s.npos : dot - start);
    if (part.empty()) throw UnparseableVersion("empty prerelease identifier in '" + std::string(whole) + "'");
    for (char c : part) {
      if (!is_alnum_or_hyphen(c)) {
        throw UnparseableVersion("invalid prerelease character in '" + std::string(whole) + "'");
      }
    }
    if (all_digits(part)) {
      ids.emplace_back(parse_number(part, whole));
    } else {
      ids.emplace_back(std::string(part));
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return ids;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

SemVer SemVer::parse(std::string_view text) {
  std::string_view s = trim(text);
  if (!s.empty() && (s.front() == 'v' || s.front() == 'V' || s.front() == '=')) s.remove_prefix(1);
  if (s.empty()) throw UnparseableVersion("empty version string");

  SemVer v;
  if (const auto plus = s.find('+'); plus != s.npos) {
    v.build = std::string(s.substr(plus + 1));
    if (v.build.empty()) throw UnparseableVersion("empty build metadata in '" + std::string(text) + "'");
    s = s.substr(0, plus);
  }
  std::string_view core = s;
  if (const auto dash = s.find('-'); dash != s.npos) {
    core = s.substr(0, dash);
    v.prerelease = parse_prerelease(s.substr(dash + 1), text);
  }

  std::uint64_t parts[3] = {0, 0, 0};
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    if (count == 3) throw UnparseableVersion("too many version components in '" + std::string(text) + "'");
    const std::size_t dot = core.find('.', start);
    const std::string_view part = core.substr(start, dot == core.npos ? core.npos : dot - start);
    parts[count++] = parse_number(part, text);
    if (dot == core.npos) break;
    start = dot + 1;
  }
  v.major = parts[0];
  v.minor = parts[1];
  v.patch = parts[2];
  return v;
}

std::string SemVer::to_string() const {
  std::string out = std::to_string(major) + '.' + std::to_string(minor) + '.' + std::to_string(patch);
  for (std::size_t i = 0; i < prerelease.size(); ++i) {
    out += i == 0 ? '-' : '.';
    if (const auto* n = std::get_if<std::uint64_t>(&prerelease[i])) {
      out += std::to_string(*n);
    } else {
      out += std::get<std::string>(prerelease[i]);
    }
  }
  if (!build.empty()) out += '+' + build;
  return out;
}

std::strong_ordering operator<=>(const SemVer& a, const SemVer& b) {
  if (auto c = a.major <=> b.major; c != 0) return c;
  if (auto c = a.minor <=> b.minor; c != 0) return c;
  if (auto c = a.patch <=> b.patch; c != 0) return c;

  // A version without prerelease outranks any prerelease of the same core.
  if (a.prerelease.empty() && b.prerelease.empty()) return std::strong_ordering::equal;
  if (a.prerelease.empty()) return std::strong_ordering::greater;
  if (b.prerelease.empty()) return std::strong_ordering::less;

  const std::size_t n = std::min(a.prerelease.size(), b.prerelease.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = a.prerelease[i];
    const auto& y = b.prerelease[i];
    if (x.index() != y.index()) {
      return x.index() < y.index() ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (const auto* xn = std::get_if<std::uint64_t>(&x)) {
      if (auto c = *xn <=> std::get<std::uint64_t>(y); c != 0) return c;
    } else {
      const int c = std::get<std::string>(x).compare(std::get<std::string>(y));
      if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
  }
  return a.prerelease.size() <=> b.prerelease.size();
}

std::strong_ordering compare_semver(std::string_view a, std::string_view b) {
  return SemVer::parse(a) <=> SemVer::parse(b);
}

}  // namespace decline
