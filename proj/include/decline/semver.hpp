#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace decline {

class UnparseableVersion : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Semantic Versioning 2.0.0 version. Build metadata is retained for
/// display but ignored by comparison.
struct SemVer {
  // Numeric identifiers compare numerically and rank below alphanumeric ones.
  using Identifier = std::variant<std::uint64_t, std::string>;

  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::uint64_t patch = 0;
  std::vector<Identifier> prerelease;
  std::string build;

  /// Lenient parse: tolerates a leading 'v' or '=', surrounding whitespace and
  /// missing minor/patch components ("1" -> 1.0.0, "v2.3" -> 2.3.0).
  static SemVer parse(std::string_view text);

  std::string to_string() const;

  friend std::strong_ordering operator<=>(const SemVer& a, const SemVer& b);
  friend bool operator==(const SemVer& a, const SemVer& b) { return (a <=> b) == 0; }
};

/// Precedence comparison of two version strings. Throws UnparseableVersion.
std::strong_ordering compare_semver(std::string_view a, std::string_view b);

}  // namespace decline
