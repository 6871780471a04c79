#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "decline/graph.hpp"

namespace decline::centrality {

class EmptyGraph : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PageRankConfig {
  double damping = 0.85;
  double tolerance = 1e-9;  // L1 change between iterates
  int max_iterations = 200;

  /// Throws std::invalid_argument unless 0 < damping < 1, tolerance >= 0 and
  /// max_iterations >= 1.
  void validate() const;
};

struct PageRankResult {
  std::vector<double> scores;  // indexed by NodeId, sums to 1
  int iterations = 0;
  bool converged = false;  // false: max_iterations hit, scores are the last iterate
  double last_delta = 0.0;
};

/// PageRank over dependent -> dependency edges: a package accumulates score
/// from its dependents, and dangling packages (no dependencies) spread their
/// mass uniformly. Reductions run in node-id order, so results are
/// bit-identical across runs.
PageRankResult pagerank(const graph::GraphSnapshot& snapshot, const PageRankConfig& config = {});

/// Negated ranks: descending score, ties by ascending name; the most central
/// package gets -1. `names[i]` names `scores[i]`.
std::vector<std::int32_t> rank_scores(std::span<const double> scores, std::span<const std::string> names);

std::map<std::string, std::int32_t> rank_scores(const std::map<std::string, double>& scores);

}  // namespace decline::centrality
