#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "decline/ingest.hpp"
#include "decline/time.hpp"

namespace decline::graph {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // dependent -> dependency
using NameTable = std::vector<std::string>;

class EventsOutOfOrder : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable dependency graph as of the end of a month. Node ids are interned
/// in order of first appearance in the event log, so they are stable across
/// months and across runs over the same log.
class GraphSnapshot {
 public:
  /// Builds a snapshot from an edge list; edges may be unsorted but must not
  /// contain self-loops or ids >= names->size().
  static std::shared_ptr<const GraphSnapshot> from_edges(Month month, std::shared_ptr<const NameTable> names,
                                                         std::vector<Edge> edges);

  Month month() const { return month_; }
  std::size_t node_count() const { return names_->size(); }
  std::size_t edge_count() const { return out_targets_.size(); }
  bool empty() const { return names_->empty(); }

  std::span<const NodeId> dependencies(NodeId id) const {
    return {out_targets_.data() + out_offsets_[id], out_targets_.data() + out_offsets_[id + 1]};
  }
  std::span<const NodeId> dependents(NodeId id) const {
    return {in_sources_.data() + in_offsets_[id], in_sources_.data() + in_offsets_[id + 1]};
  }
  std::size_t out_degree(NodeId id) const { return out_offsets_[id + 1] - out_offsets_[id]; }

  const std::string& name(NodeId id) const { return (*names_)[id]; }
  const NameTable& names() const { return *names_; }
  const std::shared_ptr<const NameTable>& shared_names() const { return names_; }

  /// Node ids ordered by package name.
  std::span<const NodeId> nodes_by_name() const { return *by_name_; }
  std::optional<NodeId> find(std::string_view name) const;
  bool has_edge(NodeId from, NodeId to) const;

  /// All edges sorted by (dependent id, dependency id).
  std::vector<Edge> edges() const;

 private:
  GraphSnapshot() = default;

  Month month_;
  std::shared_ptr<const NameTable> names_;
  std::shared_ptr<const std::vector<NodeId>> by_name_;
  std::vector<std::size_t> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<NodeId> in_sources_;

  friend class DependencyGraph;
};

/// The single-writer mutable graph that events are folded into.
class DependencyGraph {
 public:
  enum class Outcome { added, removed, unchanged, ignored_remove };

  /// Inserts both endpoints and the edge (add) or deletes the edge (remove).
  /// Repeats are idempotent; removing a missing edge is a counted no-op.
  Outcome apply_event(const ingest::DependencyChangeEvent& event);

  NodeId intern(std::string_view name);
  std::optional<NodeId> find(std::string_view name) const;

  std::size_t node_count() const { return out_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t ignored_removes() const { return ignored_removes_; }

  std::shared_ptr<const GraphSnapshot> snapshot(Month month) const;

 private:
  std::vector<std::vector<NodeId>> out_;  // sorted per node
  std::unordered_map<std::string, NodeId> ids_;
  std::shared_ptr<NameTable> pending_names_ = std::make_shared<NameTable>();
  std::size_t edge_count_ = 0;
  std::size_t ignored_removes_ = 0;

  // Name tables are shared between snapshots until a new node appears.
  mutable std::shared_ptr<const NameTable> published_names_;
  mutable std::shared_ptr<const std::vector<NodeId>> published_order_;
};

struct EventCursor {
  std::size_t position = 0;
  std::optional<Month> current_month;
};

/// Advances a DependencyGraph through a globally sorted event log one month
/// boundary at a time.
class GraphBuilder {
 public:
  /// Applies every event before the first instant of the month after `month`
  /// and returns the snapshot for `month`. `events` must be the same log (or
  /// an extension of it) on every call. Throws EventsOutOfOrder, and
  /// std::invalid_argument if `month` precedes the cursor.
  std::shared_ptr<const GraphSnapshot> advance_to_month(std::span<const ingest::DependencyChangeEvent> events,
                                                        Month month);

  const EventCursor& cursor() const { return cursor_; }
  const DependencyGraph& graph() const { return graph_; }

 private:
  DependencyGraph graph_;
  EventCursor cursor_;
};

/// Replays the log prefix up to the end of `month` into a fresh edge set.
/// Shares no state with the incremental path.
std::shared_ptr<const GraphSnapshot> rebuild_from_scratch(std::span<const ingest::DependencyChangeEvent> events,
                                                          Month month);

/// Throws EventsOutOfOrder if the log is not in canonical order.
void check_sorted(std::span<const ingest::DependencyChangeEvent> events);

// Snapshot files: "<dir>/names.tsv" holds "id<TAB>name" lines; each month is
// "<dir>/YYYY-MM.edges" with a "# month=YYYY-MM nodes=N edges=E" header
// followed by "dependent dependency" id pairs in ascending order.
void write_snapshot(const std::filesystem::path& dir, const GraphSnapshot& snapshot);
std::shared_ptr<const GraphSnapshot> read_snapshot(const std::filesystem::path& dir, Month month);

}  // namespace decline::graph
