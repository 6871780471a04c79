#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "decline/semver.hpp"
#include "decline/time.hpp"

namespace decline::ingest {

class MalformedDocument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for design/meta documents in the replication feed. Callers skip
/// these; they are not failures.
class NotAPackage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedEventLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which manifest dependency fields become graph edges. Only runtime
/// `dependencies` by default.
struct DependencyScope {
  bool runtime = true;
  bool dev = false;
  bool peer = false;
  bool optional = false;
};

struct VersionEntry {
  Timestamp release_time;
  std::map<std::string, std::string> dependencies;  // name -> version range
};

struct PackageDocument {
  std::string name;
  std::map<std::string, VersionEntry> versions;  // keyed by version string
};

struct ReleaseRecord {
  std::string package;
  std::string version_string;
  SemVer version;
  Timestamp release_time;
  std::set<std::string> dependencies;
};

enum class Action : std::uint8_t { add, remove };

std::string_view to_string(Action a);
Action parse_action(std::string_view s);

struct DependencyChangeEvent {
  Timestamp time;
  std::string source;  // dependent
  std::string target;  // dependency
  Action action = Action::add;

  friend auto operator<=>(const DependencyChangeEvent&, const DependencyChangeEvent&) = default;
};

/// Non-fatal problems found while ingesting (dropped versions, skipped lines).
struct Diagnostic {
  std::string package;
  std::string message;
};

/// Parses one replication-feed document. Accepts either the bare package
/// document or a change-feed row wrapping it under "doc".
PackageDocument parse_registry_doc(std::string_view raw_doc, const DependencyScope& scope = {},
                                   std::vector<Diagnostic>* diagnostics = nullptr);

/// Sorts releases by time (ties: semver, then version string) and keeps only
/// releases whose semver exceeds the running maximum of kept releases, which
/// drops backports. Unparseable versions and self-dependencies are dropped.
std::vector<ReleaseRecord> order_and_filter_releases(const PackageDocument& doc,
                                                     std::vector<Diagnostic>* diagnostics = nullptr);

/// Diffs consecutive dependency name sets into add/remove events.
std::vector<DependencyChangeEvent> extract_dependency_events(std::span<const ReleaseRecord> releases);

/// Sorts into the canonical global log order (time, source, target, action).
void sort_events(std::vector<DependencyChangeEvent>& events);

struct FeedSummary {
  std::size_t documents = 0;
  std::size_t packages = 0;
  std::size_t skipped = 0;    // design documents and other non-packages
  std::size_t malformed = 0;  // unparseable lines
  std::size_t releases = 0;   // kept after backport filtering
  std::vector<Diagnostic> diagnostics;
};

/// Reads a newline-delimited feed and returns the merged, sorted event log.
std::vector<DependencyChangeEvent> ingest_feed(std::istream& feed, const DependencyScope& scope,
                                               FeedSummary& summary);

// Event log files: one JSON object per line,
// {"time":"2020-01-05T00:00:00Z","source":"a","target":"b","action":"add"}.
void write_event_log(std::ostream& out, std::span<const DependencyChangeEvent> events);
std::vector<DependencyChangeEvent> read_event_log(std::istream& in);
std::string format_event(const DependencyChangeEvent& e);
DependencyChangeEvent parse_event(std::string_view line);

}  // namespace decline::ingest
