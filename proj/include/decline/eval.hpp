#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "decline/detector.hpp"
#include "decline/series_store.hpp"
#include "decline/time.hpp"

namespace decline::eval {

class MissingPrediction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class DegenerateLabels : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class ZeroVariance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};
class SetMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Label { in_decline, not_in_decline };

std::string_view to_string(Label l);

struct BaselineLabel {
  std::string package;
  Label label = Label::not_in_decline;
  Month reference_month;

  bool operator==(const BaselineLabel&) const = default;
};

// ---------------------------------------------------------------------------
// Baseline datasets

struct NpmsSnapshots {
  std::map<std::string, double> s1, s2, s3;
  Month s1_month{2018, 12};
  Month s2_month{2019, 4};
  Month s3_month{2019, 6};
};

enum class SnapshotChoice { s1, s2, s3 };

struct NpmsBaselineParams {
  double stability_tol = 0.01;  // |s2 - s1| must stay below this
  double decline_delta = 0.2;   // s2 - s3 above this labels a decline
  double min_score = 0.7;
  SnapshotChoice min_score_at = SnapshotChoice::s3;
};

struct NpmsBaseline {
  std::vector<BaselineLabel> labels;  // sorted by package
  std::vector<std::string> considered;  // present in all three snapshots
  std::vector<std::string> excluded;    // considered but unlabeled
};

/// Labels packages from three npms score snapshots: stable between S1 and
/// S2, above the minimum score, then either dropping by more than
/// decline_delta (in decline) or not dropping at all (not in decline).
NpmsBaseline build_npms_baseline(const NpmsSnapshots& snaps, const NpmsBaselineParams& params = {});

struct DeprecationRecord {
  std::string package;
  Timestamp deprecated_at;
  bool real_deprecation = false;
};

/// Real deprecations become in-decline labels referenced at the deprecation month.
std::vector<BaselineLabel> labels_from_deprecations(std::span<const DeprecationRecord> records);

struct SurveyEntry {
  std::string package;
  double awareness = 0.0;
  double usage = 0.0;
  double interest = 0.0;
  double satisfaction = 0.0;  // shares in [0, 1]
};

/// Satisfaction below `threshold` labels a package in decline.
std::vector<BaselineLabel> labels_from_survey(std::span<const SurveyEntry> entries, Month reference,
                                              double threshold = 0.5);

// ---------------------------------------------------------------------------
// Classifier metrics

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  // NaN when the denominator is zero; check the *_defined flags.
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precision_defined = false, recall_defined = false, f1_defined = false;
  std::optional<double> roc_auc;
};

/// insufficient_data predictions count as not in decline.
/// Throws MissingPrediction for labels without a prediction.
EvalReport confusion_metrics(std::span<const BaselineLabel> labels,
                             const std::map<std::string, detector::Status>& predictions);

/// Same metrics from raw counts.
EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

/// Area under the ROC curve via the Mann-Whitney statistic; ties count half.
/// Labels without a score get -inf. Throws DegenerateLabels if only one
/// class is present.
double roc_auc(std::span<const BaselineLabel> labels, const std::map<std::string, double>& scores);

/// Predictions and decline scores (-slope, or -inf without a fit) for every
/// label, classified at each label's reference month.
struct Classification {
  std::map<std::string, detector::Status> predictions;
  std::map<std::string, double> decline_scores;
};
Classification classify_labels(std::span<const BaselineLabel> labels, const centrality::SeriesStore& store,
                               const detector::DetectorConfig& config = {});

// ---------------------------------------------------------------------------
// Early detection

struct EarlyDetectionRow {
  std::string dataset;
  std::size_t labeled = 0;     // in-decline labels
  std::size_t classified = 0;  // of those, in decline at the reference month
  std::optional<double> mean_months;
  std::optional<double> median_months;
  std::map<std::string, int> months_early;  // per detected package
};

EarlyDetectionRow early_detection_report(std::string dataset, std::span<const BaselineLabel> labels,
                                         const centrality::SeriesStore& store,
                                         const detector::DetectorConfig& config = {});

// ---------------------------------------------------------------------------
// Rank correlation and ranking relevance

/// Spearman's rho as the Pearson correlation of fractional (average) ranks.
/// Throws LengthMismatch (different sizes or fewer than 2 points) and
/// ZeroVariance (a constant input).
double spearman(std::span<const double> x, std::span<const double> y);

enum class Metric { dependents, downloads, stars, forks };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

enum class Strength { very_weak, weak, moderate, strong, very_strong };
std::string_view to_string(Strength s);

struct Bucket {
  Strength strength = Strength::very_weak;
  bool negative = false;

  bool operator==(const Bucket&) const = default;
};

/// Fowler intervals on |rho| rounded to two decimals: [0, .19], [.20, .39],
/// [.40, .69], [.70, .89], [.90, 1]. The sign follows rho.
Bucket correlation_bucket(double rho);

struct CorrelationResult {
  std::string package;
  Metric metric = Metric::dependents;
  double rho = 0.0;
  Bucket bucket;
};

struct BucketHistogram {
  // counts[strength][0] positive, counts[strength][1] negative
  std::array<std::array<std::size_t, 2>, 5> counts{};

  std::size_t at(Bucket b) const { return counts[static_cast<int>(b.strength)][b.negative ? 1 : 0]; }
  std::size_t total() const;
};

BucketHistogram correlation_buckets(std::span<const CorrelationResult> results);

/// Correlates a package's centrality rank series with a metric series over
/// their common months. nullopt when fewer than 2 months overlap or either
/// side is constant.
std::optional<CorrelationResult> correlate(const centrality::CentralitySeries& centrality,
                                           std::span<const detector::MetricPoint> metric_series, Metric metric);

/// NDCG of `proposed` against `ground_truth`, with relevance K - position
/// (1-based) in the ground truth. A single item scores 1. Throws SetMismatch
/// unless both lists hold the same distinct packages.
double ndcg(std::span<const std::string> proposed, std::span<const std::string> ground_truth);

/// Runs the sliding-window latency measurement on a raw popularity metric.
std::optional<int> slope_analysis_for_metric(std::span<const detector::MetricPoint> metric_series, Month reference,
                                             const detector::DetectorConfig& config = {});

}  // namespace decline::eval
