#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "decline/centrality.hpp"
#include "decline/pipeline.hpp"
#include "oracles.hpp"

using namespace decline;
using namespace decline::centrality;
using decline::graph::Edge;
using decline::graph::GraphSnapshot;
using decline::ingest::Action;
using decline::ingest::DependencyChangeEvent;

namespace {

std::shared_ptr<const GraphSnapshot> make_graph(std::vector<std::string> names, std::vector<Edge> edges) {
  return GraphSnapshot::from_edges(Month{2020, 1}, std::make_shared<graph::NameTable>(std::move(names)),
                                   std::move(edges));
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("directed cycle is uniform") {
  const auto g = make_graph({"A", "B", "C"}, {{0, 1}, {1, 2}, {2, 0}});
  const auto r = pagerank(*g);
  CHECK(r.converged);
  for (double s : r.scores) CHECK(s == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("isolated nodes are uniform") {
  const auto g = make_graph({"a", "b", "c", "d", "e"}, {});
  const auto r = pagerank(*g);
  for (double s : r.scores) CHECK(std::abs(s - 0.2) < 1e-15);
  CHECK(rank_scores(r.scores, g->names()) == std::vector<std::int32_t>{-1, -2, -3, -4, -5});
}

TEST_CASE("chain A->B->C against frozen dense oracle values") {
  // Computed with numpy dense power iteration, d = 0.85.
  const auto g = make_graph({"A", "B", "C"}, {{0, 1}, {1, 2}});
  const auto r = pagerank(*g);
  CHECK(std::abs(r.scores[0] - 0.18441678192715538) < 1e-10);
  CHECK(std::abs(r.scores[1] - 0.34117104656523745) < 1e-10);
  CHECK(std::abs(r.scores[2] - 0.47441217150760717) < 1e-10);
  CHECK(std::abs(sum(r.scores) - 1.0) < 1e-9);
}

TEST_CASE("random graphs match the dense oracle") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 1 + rng() % 50;
    std::set<Edge> edges;
    const std::size_t m = rng() % (n * 3 + 1);
    for (std::size_t i = 0; i < m && n > 1; ++i) {
      const auto a = static_cast<graph::NodeId>(rng() % n);
      const auto b = static_cast<graph::NodeId>(rng() % n);
      if (a != b) edges.emplace(a, b);
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
    const std::vector<Edge> edge_list(edges.begin(), edges.end());
    const auto g = make_graph(names, edge_list);
    const auto r = pagerank(*g);
    const auto ref = oracle::dense_pagerank(n, edge_list);
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) l1 += std::abs(r.scores[i] - ref[i]);
    CHECK(l1 < 1e-8);
  }
}

TEST_CASE("adding a dependent never lowers the target's score") {
  const auto before = make_graph({"a", "b", "c", "d"}, {{0, 1}, {2, 1}, {1, 3}});
  const auto after = make_graph({"a", "b", "c", "d"}, {{0, 1}, {2, 1}, {1, 3}, {0, 3}});
  CHECK(pagerank(*after).scores[3] >= pagerank(*before).scores[3]);
}

TEST_CASE("determinism and non-convergence flag") {
  const auto g = make_graph({"a", "b", "c", "d"}, {{0, 1}, {2, 1}, {1, 3}, {3, 0}});
  const auto r1 = pagerank(*g);
  const auto r2 = pagerank(*g);
  CHECK(r1.scores == r2.scores);

  PageRankConfig tight;
  tight.tolerance = 0.0;
  tight.max_iterations = 3;
  const auto r3 = pagerank(*g, tight);
  CHECK(!r3.converged);
  CHECK(r3.iterations == 3);
  CHECK(r3.last_delta > 0.0);
}

TEST_CASE("config validation and empty graph") {
  PageRankConfig c;
  c.damping = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.tolerance = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(pagerank(*make_graph({}, {})), EmptyGraph);
}

TEST_CASE("rank_scores rules") {
  using M = std::map<std::string, double>;
  using R = std::map<std::string, std::int32_t>;
  CHECK(rank_scores(M{{"A", 0.5}, {"B", 0.3}, {"C", 0.2}}) == R{{"A", -1}, {"B", -2}, {"C", -3}});
  CHECK(rank_scores(M{{"A", 0.4}, {"B", 0.4}}) == R{{"A", -1}, {"B", -2}});
  CHECK(rank_scores(M{{"b", 0.4}, {"a", 0.4}, {"c", 0.9}}) == R{{"a", -2}, {"b", -3}, {"c", -1}});
}

TEST_CASE("10k random scores rank into a monotone permutation") {
  std::mt19937_64 rng(8);
  std::map<std::string, double> scores;
  while (scores.size() < 10000) {
    // Coarse values force plenty of ties.
    scores["pkg" + std::to_string(rng())] = static_cast<double>(rng() % 500) / 500.0;
  }
  const auto ranks = rank_scores(scores);
  std::vector<int> seen;
  for (const auto& [name, r] : ranks) seen.push_back(-r);
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 10000; ++i) REQUIRE(seen[static_cast<std::size_t>(i)] == i + 1);
  // Walk in rank order and check monotonicity with the tie rule.
  std::vector<std::pair<int, std::string>> by_rank;
  for (const auto& [name, r] : ranks) by_rank.emplace_back(-r, name);
  std::sort(by_rank.begin(), by_rank.end());
  for (std::size_t i = 1; i < by_rank.size(); ++i) {
    const double hi = scores[by_rank[i - 1].second];
    const double lo = scores[by_rank[i].second];
    REQUIRE((hi > lo || (hi == lo && by_rank[i - 1].second < by_rank[i].second)));
  }
}

TEST_CASE("small maps agree with the brute rank oracle") {
  std::mt19937_64 rng(81);
  for (int round = 0; round < 50; ++round) {
    std::map<std::string, double> scores;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) scores["k" + std::to_string(rng() % 100)] = static_cast<double>(rng() % 7);
    const auto got = rank_scores(scores);
    const auto want = oracle::brute_ranks(scores);
    for (const auto& [k, v] : want) CHECK(got.at(k) == v);
  }
}

TEST_CASE("pipeline over 8 months equals per-month rebuild plus dense oracle") {
  auto at = [](const char* s) { return parse_rfc3339(s); };
  const std::vector<DependencyChangeEvent> log = {
      {at("2019-01-10T00:00:00Z"), "app", "lib", Action::add},
      {at("2019-03-02T00:00:00Z"), "tool", "lib", Action::add},
      {at("2019-04-15T00:00:00Z"), "app", "lib", Action::remove},
      {at("2019-04-15T00:00:00Z"), "app", "tool", Action::add},
      {at("2019-06-01T00:00:00Z"), "lib", "tool", Action::add},
      {at("2019-07-20T00:00:00Z"), "tool", "lib", Action::remove},
  };
  const auto store = run_monthly_pipeline(log, Month{2019, 1}, Month{2019, 8});
  REQUIRE(store.month_count() == 8);
  CHECK(*store.first_month() == Month{2019, 1});
  for (Month m{2019, 1}; m <= Month{2019, 8}; m = m.next()) {
    const auto snap = graph::rebuild_from_scratch(log, m);
    const auto ref = oracle::dense_pagerank(snap->node_count(), snap->edges());
    std::map<std::string, double> ref_scores;
    for (graph::NodeId id = 0; id < snap->node_count(); ++id) ref_scores[snap->name(id)] = ref[id];
    const auto ref_ranks = oracle::brute_ranks(ref_scores, 1e-12);
    const auto* col = store.column_for(m);
    REQUIRE(col != nullptr);
    for (const auto& [name, score] : ref_scores) {
      const auto id = *store.find(name);
      CHECK(std::abs(col->scores[id] - score) < 1e-6);
      CHECK(col->ranks[id] == ref_ranks.at(name));
    }
  }
}

TEST_CASE("pipeline: empty log, leading empty months, resume") {
  CHECK(run_monthly_pipeline({}, Month{2010, 1}, Month{2020, 12}).empty());

  auto at = [](const char* s) { return parse_rfc3339(s); };
  const std::vector<DependencyChangeEvent> log = {
      {at("2010-03-10T00:00:00Z"), "a", "b", Action::add},
      {at("2011-06-10T00:00:00Z"), "c", "b", Action::add},
  };
  const auto full = run_monthly_pipeline(log, Month{2010, 1}, Month{2011, 12});
  CHECK(full.month_count() == 22);
  CHECK(*full.first_month() == Month{2010, 3});

  MonthlyPipeline first;
  first.append_events(log);
  first.run(Month{2010, 1}, Month{2010, 12});
  MonthlyPipeline resumed({}, first.release_store());
  resumed.append_events(log);
  int hook_calls = 0;
  const auto summary = resumed.run(Month{2000, 1}, Month{2011, 12},
                                   [&](const GraphSnapshot&, const PageRankResult&) { ++hook_calls; });
  CHECK(summary.months_processed == 12);
  CHECK(hook_calls == 12);
  CHECK(summary.packages_ranked == 3);
  CHECK(resumed.store() == full);

  MonthlyPipeline p;
  p.append_events(log);
  CHECK_THROWS_AS(p.append_events(std::vector<DependencyChangeEvent>{{at("2009-01-01T00:00:00Z"), "x", "y", Action::add}}),
                  graph::EventsOutOfOrder);
  CHECK(p.events().size() == 2);
}

TEST_CASE("study window yields 132 columns") {
  auto at = [](const char* s) { return parse_rfc3339(s); };
  const std::vector<DependencyChangeEvent> log = {{at("2009-11-01T00:00:00Z"), "a", "b", Action::add}};
  const auto store = run_monthly_pipeline(log, Month{2010, 1}, Month{2020, 12});
  CHECK(store.month_count() == 132);
  for (std::size_t i = 0; i < store.month_count(); ++i) {
    const auto& col = store.column(i);
    std::vector<std::int32_t> r = col.ranks;
    std::sort(r.begin(), r.end());
    CHECK(r == std::vector<std::int32_t>{-2, -1});
  }
}
