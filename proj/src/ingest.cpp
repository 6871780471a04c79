#include "decline/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "json.hpp"

namespace decline::ingest {
namespace {

using nlohmann::json;

constexpr std::string_view kDesignPrefix = "_design/";

bool valid_package_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

void note(std::vector<Diagnostic>* sink, std::string_view package, std::string message) {
  if (sink != nullptr) sink->push_back({std::string(package), std::move(message)});
}

void collect_dependencies(const json& field, std::string_view package, std::string_view version,
                          std::map<std::string, std::string>& out, std::vector<Diagnostic>* diagnostics) {
  if (field.is_null()) return;
  if (field.is_object()) {
    for (const auto& [dep, range] : field.items()) {
      out.emplace(dep, range.is_string() ? range.get<std::string>() : range.dump());
    }
  } else if (field.is_array()) {
    // Very old manifests list dependency names without ranges.
    for (const auto& dep : field) {
      if (dep.is_string()) out.emplace(dep.get<std::string>(), "*");
    }
  } else {
    note(diagnostics, package, "version " + std::string(version) + ": ignoring non-map dependency field");
  }
}

}  // namespace

std::string_view to_string(Action a) { return a == Action::add ? "add" : "remove"; }

Action parse_action(std::string_view s) {
  if (s == "add") return Action::add;
  if (s == "remove") return Action::remove;
  throw MalformedEventLog("unknown action '" + std::string(s) + "'");
}

PackageDocument parse_registry_doc(std::string_view raw_doc, const DependencyScope& scope,
                                   std::vector<Diagnostic>* diagnostics) {
  json root;
  try {
    root = json::parse(raw_doc);
  } catch (const json::parse_error& e) {
    throw MalformedDocument(std::string("unparseable document: ") + e.what());
  }
  if (!root.is_object()) throw MalformedDocument("document is not an object");

  // Change-feed rows wrap the document: {"id": ..., "doc": {...}}.
  if (root.contains("doc") && root["doc"].is_object()) {
    json inner = std::move(root["doc"]);
    root = std::move(inner);
  }

  const std::string id = root.value("_id", std::string{});
  if (id.starts_with(kDesignPrefix)) throw NotAPackage("design document " + id);
  if (root.value("_deleted", false)) throw NotAPackage("deleted document " + id);

  std::string name;
  if (auto it = root.find("name"); it != root.end() && it->is_string()) {
    name = it->get<std::string>();
  } else {
    name = id;
  }
  if (name.starts_with(kDesignPrefix)) throw NotAPackage("design document " + name);

  const auto versions_it = root.find("versions");
  if (versions_it == root.end() || !versions_it->is_object()) {
    throw NotAPackage("document without a versions map: " + (name.empty() ? id : name));
  }
  if (!valid_package_name(name)) throw MalformedDocument("invalid package name '" + name + "'");

  const json* times = nullptr;
  if (auto it = root.find("time"); it != root.end() && it->is_object()) times = &*it;

  PackageDocument doc;
  doc.name = name;
  for (const auto& [version, manifest] : versions_it->items()) {
    std::optional<Timestamp> released;
    if (times != nullptr) {
      if (auto t = times->find(version); t != times->end() && t->is_string()) {
        try {
          released = parse_rfc3339(t->get_ref<const std::string&>());
        } catch (const std::invalid_argument& e) {
          note(diagnostics, name, "version " + version + ": " + e.what());
        }
      }
    }
    if (!released) {
      note(diagnostics, name, "version " + version + ": no usable release time, dropped");
      continue;
    }
    VersionEntry entry;
    entry.release_time = *released;
    if (manifest.is_object()) {
      const auto field = [&](const char* key) -> const json& {
        static const json null_json;
        auto it = manifest.find(key);
        return it == manifest.end() ? null_json : *it;
      };
      if (scope.runtime) collect_dependencies(field("dependencies"), name, version, entry.dependencies, diagnostics);
      if (scope.dev) collect_dependencies(field("devDependencies"), name, version, entry.dependencies, diagnostics);
      if (scope.peer) collect_dependencies(field("peerDependencies"), name, version, entry.dependencies, diagnostics);
      if (scope.optional) {
        collect_dependencies(field("optionalDependencies"), name, version, entry.dependencies, diagnostics);
      }
    }
    doc.versions.emplace(version, std::move(entry));
  }
  return doc;
}

std::vector<ReleaseRecord> order_and_filter_releases(const PackageDocument& doc,
                                                     std::vector<Diagnostic>* diagnostics) {
  std::vector<ReleaseRecord> all;
  all.reserve(doc.versions.size());
  for (const auto& [version, entry] : doc.versions) {
    ReleaseRecord r;
    try {
      r.version = SemVer::parse(version);
    } catch (const UnparseableVersion& e) {
      note(diagnostics, doc.name, "version " + version + " dropped: " + e.what());
      continue;
    }
    r.package = doc.name;
    r.version_string = version;
    r.release_time = entry.release_time;
    for (const auto& [dep, range] : entry.dependencies) {
      if (dep != doc.name) r.dependencies.insert(dep);
    }
    all.push_back(std::move(r));
  }

  std::sort(all.begin(), all.end(), [](const ReleaseRecord& a, const ReleaseRecord& b) {
    if (a.release_time != b.release_time) return a.release_time < b.release_time;
    if (const auto c = a.version <=> b.version; c != 0) return c < 0;
    return a.version_string < b.version_string;
  });

  std::vector<ReleaseRecord> kept;
  kept.reserve(all.size());
  for (auto& r : all) {
    if (kept.empty() || r.version > kept.back().version) {
      kept.push_back(std::move(r));
    } else {
      note(diagnostics, doc.name, "version " + r.version_string + " filtered: not above " + kept.back().version_string);
    }
  }
  return kept;
}

std::vector<DependencyChangeEvent> extract_dependency_events(std::span<const ReleaseRecord> releases) {
  std::vector<DependencyChangeEvent> events;
  const std::set<std::string> empty;
  const std::set<std::string>* previous = &empty;
  for (const auto& release : releases) {
    const auto& current = release.dependencies;
    for (const auto& dep : *previous) {
      if (!current.contains(dep)) events.push_back({release.release_time, release.package, dep, Action::remove});
    }
    for (const auto& dep : current) {
      if (!previous->contains(dep)) events.push_back({release.release_time, release.package, dep, Action::add});
    }
    previous = &current;
  }
  return events;
}

void sort_events(std::vector<DependencyChangeEvent>& events) { std::sort(events.begin(), events.end()); }

std::vector<DependencyChangeEvent> ingest_feed(std::istream& feed, const DependencyScope& scope,
                                               FeedSummary& summary) {
  std::vector<DependencyChangeEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(feed, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++summary.documents;
    PackageDocument doc;
    try {
      doc = parse_registry_doc(line, scope, &summary.diagnostics);
    } catch (const NotAPackage&) {
      ++summary.skipped;
      continue;
    } catch (const MalformedDocument& e) {
      ++summary.malformed;
      summary.diagnostics.push_back({"", "line " + std::to_string(line_no) + ": " + e.what()});
      continue;
    }
    ++summary.packages;
    const auto releases = order_and_filter_releases(doc, &summary.diagnostics);
    summary.releases += releases.size();
    auto package_events = extract_dependency_events(releases);
    events.insert(events.end(), std::make_move_iterator(package_events.begin()),
                  std::make_move_iterator(package_events.end()));
  }
  sort_events(events);
  return events;
}

std::string format_event(const DependencyChangeEvent& e) {
  json j = json::object();
  j["time"] = format_rfc3339(e.time);
  j["source"] = e.source;
  j["target"] = e.target;
  j["action"] = to_string(e.action);
  return j.dump();
}

DependencyChangeEvent parse_event(std::string_view line) {
  try {
    const json j = json::parse(line);
    DependencyChangeEvent e;
    e.time = parse_rfc3339(j.at("time").get<std::string>());
    e.source = j.at("source").get<std::string>();
    e.target = j.at("target").get<std::string>();
    e.action = parse_action(j.at("action").get<std::string>());
    if (e.source.empty() || e.target.empty()) throw MalformedEventLog("empty package name");
    if (e.source == e.target) throw MalformedEventLog("self-loop event for " + e.source);
    return e;
  } catch (const json::exception& ex) {
    throw MalformedEventLog(std::string("bad event record: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw MalformedEventLog(std::string("bad event time: ") + ex.what());
  }
}

void write_event_log(std::ostream& out, std::span<const DependencyChangeEvent> events) {
  for (const auto& e : events) out << format_event(e) << '\n';
}

std::vector<DependencyChangeEvent> read_event_log(std::istream& in) {
  std::vector<DependencyChangeEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(parse_event(line));
    } catch (const MalformedEventLog& e) {
      throw MalformedEventLog("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

}  // namespace decline::ingest
