#include "decline/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace decline::centrality {

void PageRankConfig::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("damping must lie in (0, 1)");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

PageRankResult pagerank(const graph::GraphSnapshot& snapshot, const PageRankConfig& config) {
  config.validate();
  const std::size_t n = snapshot.node_count();
  if (n == 0) throw EmptyGraph("pagerank on an empty graph");

  const double d = config.damping;
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> inv_out(n, 0.0);
  std::vector<graph::NodeId> dangling;
  for (graph::NodeId id = 0; id < n; ++id) {
    const std::size_t deg = snapshot.out_degree(id);
    if (deg == 0) {
      dangling.push_back(id);
    } else {
      inv_out[id] = 1.0 / static_cast<double>(deg);
    }
  }

  PageRankResult result;
  std::vector<double> x(n, inv_n);
  std::vector<double> next(n);
  std::vector<double> share(n);
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    double dangling_mass = 0.0;
    for (graph::NodeId id : dangling) dangling_mass += x[id];
    for (std::size_t i = 0; i < n; ++i) share[i] = x[i] * inv_out[i];

    const double base = (1.0 - d) * inv_n + d * dangling_mass * inv_n;
    double delta = 0.0;
    for (graph::NodeId id = 0; id < n; ++id) {
      double incoming = 0.0;
      for (graph::NodeId q : snapshot.dependents(id)) incoming += share[q];
      next[id] = base + d * incoming;
      delta += std::abs(next[id] - x[id]);
    }
    x.swap(next);
    result.iterations = iter;
    result.last_delta = delta;
    if (delta < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.scores = std::move(x);
  return result;
}

std::vector<std::int32_t> rank_scores(std::span<const double> scores, std::span<const std::string> names) {
  if (scores.size() != names.size()) throw std::invalid_argument("scores and names differ in length");
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return names[a] < names[b];
  });
  std::vector<std::int32_t> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = -static_cast<std::int32_t>(pos + 1);
  return ranks;
}

std::map<std::string, std::int32_t> rank_scores(const std::map<std::string, double>& scores) {
  std::vector<std::string> names;
  std::vector<double> values;
  names.reserve(scores.size());
  values.reserve(scores.size());
  for (const auto& [name, score] : scores) {
    names.push_back(name);
    values.push_back(score);
  }
  const auto ranks = rank_scores(values, names);
  std::map<std::string, std::int32_t> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i], ranks[i]);
  return out;
}

}  // namespace decline::centrality
