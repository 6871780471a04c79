#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "decline/centrality.hpp"
#include "decline/graph.hpp"
#include "decline/ingest.hpp"
#include "decline/series_store.hpp"

namespace decline::centrality {

struct PipelineSummary {
  int months_processed = 0;
  std::size_t packages_ranked = 0;  // in the last processed month
  int unconverged_months = 0;
  std::optional<Month> last_month;
};

/// Owns the event log, the incremental graph, and the series store. Each
/// processed month advances the graph, runs PageRank, ranks, and appends a
/// column; a failure leaves every completed month in the store.
class MonthlyPipeline {
 public:
  using SnapshotHook = std::function<void(const graph::GraphSnapshot&, const PageRankResult&)>;

  explicit MonthlyPipeline(PageRankConfig config = {}, SeriesStore store = {});

  /// Appends events that must sort at or after the current log tail.
  /// Throws graph::EventsOutOfOrder and leaves the log unchanged on failure.
  void append_events(std::span<const ingest::DependencyChangeEvent> events);

  /// Processes months through `end`. With a non-empty store this resumes
  /// after its last month and `start` is ignored; otherwise it starts at
  /// `start`. Months whose graph is still empty produce no column.
  PipelineSummary run(Month start, Month end, const SnapshotHook& hook = {});

  const SeriesStore& store() const { return store_; }
  SeriesStore release_store() { return std::move(store_); }
  const std::vector<ingest::DependencyChangeEvent>& events() const { return events_; }
  const PageRankConfig& config() const { return config_; }

 private:
  PageRankConfig config_;
  SeriesStore store_;
  std::vector<ingest::DependencyChangeEvent> events_;
  graph::GraphBuilder builder_;
};

/// Runs the pipeline over [start, end] into a fresh store.
SeriesStore run_monthly_pipeline(std::span<const ingest::DependencyChangeEvent> events, Month start, Month end,
                                 const PageRankConfig& config = {});

}  // namespace decline::centrality
