#include "decline/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace decline::graph {
namespace {

std::shared_ptr<const std::vector<NodeId>> order_by_name(const NameTable& names) {
  auto order = std::make_shared<std::vector<NodeId>>(names.size());
  std::iota(order->begin(), order->end(), NodeId{0});
  std::sort(order->begin(), order->end(), [&](NodeId a, NodeId b) { return names[a] < names[b]; });
  return order;
}

std::string describe(const ingest::DependencyChangeEvent& e) {
  return format_rfc3339(e.time) + " " + e.source + "->" + e.target + " " + std::string(ingest::to_string(e.action));
}

void require_order(const ingest::DependencyChangeEvent& previous, const ingest::DependencyChangeEvent& next,
                   std::size_t index) {
  if (next < previous) {
    throw EventsOutOfOrder("event " + std::to_string(index) + " (" + describe(next) + ") sorts before its predecessor (" +
                           describe(previous) + ")");
  }
}

}  // namespace

std::shared_ptr<const GraphSnapshot> GraphSnapshot::from_edges(Month month, std::shared_ptr<const NameTable> names,
                                                               std::vector<Edge> edges) {
  std::shared_ptr<GraphSnapshot> snap(new GraphSnapshot());
  snap->month_ = month;
  snap->by_name_ = order_by_name(*names);
  snap->names_ = std::move(names);

  const std::size_t n = snap->names_->size();
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  snap->out_offsets_.assign(n + 1, 0);
  snap->in_offsets_.assign(n + 1, 0);
  for (const auto& [from, to] : edges) {
    if (from >= n || to >= n) throw std::out_of_range("edge endpoint outside the name table");
    if (from == to) throw std::invalid_argument("self-loop on " + (*snap->names_)[from]);
    ++snap->out_offsets_[from + 1];
    ++snap->in_offsets_[to + 1];
  }
  std::partial_sum(snap->out_offsets_.begin(), snap->out_offsets_.end(), snap->out_offsets_.begin());
  std::partial_sum(snap->in_offsets_.begin(), snap->in_offsets_.end(), snap->in_offsets_.begin());

  snap->out_targets_.resize(edges.size());
  snap->in_sources_.resize(edges.size());
  std::vector<std::size_t> fill(snap->in_offsets_.begin(), snap->in_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    snap->out_targets_[i] = edges[i].second;
    // Edges are sorted by source, so each dependents list comes out sorted.
    snap->in_sources_[fill[edges[i].second]++] = edges[i].first;
  }
  return snap;
}

std::optional<NodeId> GraphSnapshot::find(std::string_view name) const {
  const auto& order = *by_name_;
  auto it = std::lower_bound(order.begin(), order.end(), name,
                             [&](NodeId id, std::string_view key) { return (*names_)[id] < key; });
  if (it == order.end() || (*names_)[*it] != name) return std::nullopt;
  return *it;
}

bool GraphSnapshot::has_edge(NodeId from, NodeId to) const {
  if (from >= node_count()) return false;
  const auto deps = dependencies(from);
  return std::binary_search(deps.begin(), deps.end(), to);
}

std::vector<Edge> GraphSnapshot::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId id = 0; id < node_count(); ++id) {
    for (NodeId to : dependencies(id)) out.emplace_back(id, to);
  }
  return out;
}

NodeId DependencyGraph::intern(std::string_view name) {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  const auto id = static_cast<NodeId>(out_.size());
  ids_.emplace(std::string(name), id);
  pending_names_->emplace_back(name);
  out_.emplace_back();
  return id;
}

std::optional<NodeId> DependencyGraph::find(std::string_view name) const {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

DependencyGraph::Outcome DependencyGraph::apply_event(const ingest::DependencyChangeEvent& event) {
  if (event.source == event.target) throw std::invalid_argument("self-loop event for " + event.source);
  if (event.action == ingest::Action::add) {
    const NodeId from = intern(event.source);
    const NodeId to = intern(event.target);
    auto& deps = out_[from];
    auto it = std::lower_bound(deps.begin(), deps.end(), to);
    if (it != deps.end() && *it == to) return Outcome::unchanged;
    deps.insert(it, to);
    ++edge_count_;
    return Outcome::added;
  }
  const auto from = find(event.source);
  const auto to = find(event.target);
  if (from && to) {
    auto& deps = out_[*from];
    auto it = std::lower_bound(deps.begin(), deps.end(), *to);
    if (it != deps.end() && *it == *to) {
      deps.erase(it);
      --edge_count_;
      return Outcome::removed;
    }
  }
  ++ignored_removes_;
  return Outcome::ignored_remove;
}

std::shared_ptr<const GraphSnapshot> DependencyGraph::snapshot(Month month) const {
  if (!published_names_ || published_names_->size() != pending_names_->size()) {
    published_names_ = std::make_shared<const NameTable>(*pending_names_);
    published_order_ = order_by_name(*published_names_);
  }
  std::shared_ptr<GraphSnapshot> snap(new GraphSnapshot());
  snap->month_ = month;
  snap->names_ = published_names_;
  snap->by_name_ = published_order_;

  const std::size_t n = out_.size();
  snap->out_offsets_.resize(n + 1);
  snap->in_offsets_.assign(n + 1, 0);
  snap->out_offsets_[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    snap->out_offsets_[i + 1] = snap->out_offsets_[i] + out_[i].size();
    for (NodeId to : out_[i]) ++snap->in_offsets_[to + 1];
  }
  std::partial_sum(snap->in_offsets_.begin(), snap->in_offsets_.end(), snap->in_offsets_.begin());

  snap->out_targets_.reserve(edge_count_);
  snap->in_sources_.resize(edge_count_);
  std::vector<std::size_t> fill(snap->in_offsets_.begin(), snap->in_offsets_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId to : out_[i]) {
      snap->out_targets_.push_back(to);
      snap->in_sources_[fill[to]++] = static_cast<NodeId>(i);
    }
  }
  return snap;
}

std::shared_ptr<const GraphSnapshot> GraphBuilder::advance_to_month(
    std::span<const ingest::DependencyChangeEvent> events, Month month) {
  if (cursor_.current_month && month < *cursor_.current_month) {
    throw std::invalid_argument("cannot advance backwards from " + cursor_.current_month->to_string() + " to " +
                                month.to_string());
  }
  if (events.size() < cursor_.position) throw std::invalid_argument("event log shrank between advances");

  const Timestamp boundary = month.end();
  std::size_t pos = cursor_.position;
  while (pos < events.size() && events[pos].time < boundary) {
    if (pos > 0) require_order(events[pos - 1], events[pos], pos);
    graph_.apply_event(events[pos]);
    ++pos;
  }
  if (pos < events.size() && pos > 0) require_order(events[pos - 1], events[pos], pos);
  cursor_.position = pos;
  cursor_.current_month = month;
  return graph_.snapshot(month);
}

std::shared_ptr<const GraphSnapshot> rebuild_from_scratch(std::span<const ingest::DependencyChangeEvent> events,
                                                          Month month) {
  const Timestamp boundary = month.end();
  std::map<std::string, NodeId> ids;
  auto names = std::make_shared<NameTable>();
  std::set<Edge> edges;
  const auto id_of = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<NodeId>(names->size()));
    if (inserted) names->push_back(name);
    return it->second;
  };
  for (std::size_t i = 0; i < events.size() && events[i].time < boundary; ++i) {
    if (i > 0) require_order(events[i - 1], events[i], i);
    const auto& e = events[i];
    if (e.action == ingest::Action::add) {
      const NodeId from = id_of(e.source);
      const NodeId to = id_of(e.target);
      edges.emplace(from, to);
    } else if (auto f = ids.find(e.source), t = ids.find(e.target); f != ids.end() && t != ids.end()) {
      edges.erase({f->second, t->second});
    }
  }
  return GraphSnapshot::from_edges(month, std::move(names), {edges.begin(), edges.end()});
}

void check_sorted(std::span<const ingest::DependencyChangeEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i) require_order(events[i - 1], events[i], i);
}

void write_snapshot(const std::filesystem::path& dir, const GraphSnapshot& snapshot) {
  std::filesystem::create_directories(dir);
  const auto names_path = dir / "names.tsv";
  // Name tables only grow, so keep whichever on-disk table is longer.
  std::size_t existing = 0;
  if (std::ifstream in{names_path}) {
    std::string line;
    while (std::getline(in, line)) ++existing;
  }
  if (existing <= snapshot.node_count()) {
    std::ofstream out(names_path, std::ios::binary | std::ios::trunc);
    for (NodeId id = 0; id < snapshot.node_count(); ++id) out << id << '\t' << snapshot.name(id) << '\n';
    if (!out) throw std::runtime_error("failed writing " + names_path.string());
  }
  const auto edges_path = dir / (snapshot.month().to_string() + ".edges");
  std::ofstream out(edges_path, std::ios::binary | std::ios::trunc);
  out << "# month=" << snapshot.month().to_string() << " nodes=" << snapshot.node_count()
      << " edges=" << snapshot.edge_count() << '\n';
  for (NodeId id = 0; id < snapshot.node_count(); ++id) {
    for (NodeId to : snapshot.dependencies(id)) out << id << ' ' << to << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + edges_path.string());
}

std::shared_ptr<const GraphSnapshot> read_snapshot(const std::filesystem::path& dir, Month month) {
  const auto edges_path = dir / (month.to_string() + ".edges");
  std::ifstream edges_in(edges_path);
  if (!edges_in) throw std::runtime_error("cannot open " + edges_path.string());
  std::string header;
  std::getline(edges_in, header);
  std::size_t nodes = 0;
  std::size_t edge_total = 0;
  char month_buf[8] = {};
  if (std::sscanf(header.c_str(), "# month=%7s nodes=%zu edges=%zu", month_buf, &nodes, &edge_total) != 3 ||
      Month::parse(month_buf) != month) {
    throw std::runtime_error("bad snapshot header in " + edges_path.string());
  }

  auto names = std::make_shared<NameTable>();
  names->reserve(nodes);
  std::ifstream names_in(dir / "names.tsv");
  std::string line;
  while (names->size() < nodes && std::getline(names_in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos || std::stoul(line.substr(0, tab)) != names->size()) {
      throw std::runtime_error("bad name table line: " + line);
    }
    names->push_back(line.substr(tab + 1));
  }
  if (names->size() != nodes) throw std::runtime_error("name table shorter than snapshot node count");

  std::vector<Edge> edges;
  edges.reserve(edge_total);
  NodeId from = 0;
  NodeId to = 0;
  while (edges_in >> from >> to) edges.emplace_back(from, to);
  if (edges.size() != edge_total) throw std::runtime_error("edge count mismatch in " + edges_path.string());
  return GraphSnapshot::from_edges(month, std::move(names), std::move(edges));
}

}  // namespace decline::graph
