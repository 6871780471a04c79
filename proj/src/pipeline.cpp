#include "decline/pipeline.hpp"

namespace decline::centrality {

MonthlyPipeline::MonthlyPipeline(PageRankConfig config, SeriesStore store)
    : config_(config), store_(std::move(store)) {
  config_.validate();
}

void MonthlyPipeline::append_events(std::span<const ingest::DependencyChangeEvent> events) {
  if (events.empty()) return;
  graph::check_sorted(events);
  if (!events_.empty() && events.front() < events_.back()) {
    throw graph::EventsOutOfOrder("appended events start before the end of the existing log");
  }
  events_.insert(events_.end(), events.begin(), events.end());
}

PipelineSummary MonthlyPipeline::run(Month start, Month end, const SnapshotHook& hook) {
  const Month first = store_.last_month() ? store_.last_month()->next() : start;
  if (!store_.last_month() && start > end) throw std::invalid_argument("start month after end month");

  PipelineSummary summary;
  for (Month month = first; month <= end; month = month.next()) {
    if (builder_.cursor().current_month && month <= *builder_.cursor().current_month) continue;
    const auto snapshot = builder_.advance_to_month(events_, month);
    if (snapshot->empty()) continue;
    const auto ranked = pagerank(*snapshot, config_);
    const auto ranks = rank_scores(ranked.scores, snapshot->names());
    store_.append(month, snapshot->names(), ranked.scores, ranks);
    if (hook) hook(*snapshot, ranked);

    ++summary.months_processed;
    summary.packages_ranked = snapshot->node_count();
    if (!ranked.converged) ++summary.unconverged_months;
    summary.last_month = month;
  }
  return summary;
}

SeriesStore run_monthly_pipeline(std::span<const ingest::DependencyChangeEvent> events, Month start, Month end,
                                 const PageRankConfig& config) {
  MonthlyPipeline pipeline(config);
  pipeline.append_events(events);
  pipeline.run(start, end);
  return pipeline.release_store();
}

}  // namespace decline::centrality
