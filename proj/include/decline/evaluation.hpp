#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decline/detector.hpp"
#include "decline/eval.hpp"
#include "decline/series_store.hpp"

namespace decline::eval {

// Fixture readers. All files are comma-separated with a header row.

/// "package,score"
std::map<std::string, double> read_npms_snapshot(std::istream& in);
/// "package,date,is_real_deprecation"; date is YYYY-MM-DD or RFC 3339.
std::vector<DeprecationRecord> read_deprecations(std::istream& in);
/// "package,awareness,usage,interest,satisfaction" with shares in [0, 1].
std::vector<SurveyEntry> read_survey(std::istream& in);
/// "package,month,value"; one file per metric.
std::map<std::string, detector::MetricSeries> read_metric_history(std::istream& in);

struct EvaluationInputs {
  std::optional<NpmsSnapshots> npms;
  NpmsBaselineParams npms_params;
  std::optional<std::vector<DeprecationRecord>> deprecations;
  std::optional<std::vector<SurveyEntry>> survey;
  Month survey_month{2019, 11};
  std::map<Metric, std::map<std::string, detector::MetricSeries>> metrics;
};

struct NdcgRow {
  std::string category;  // awareness, usage, interest, satisfaction
  std::size_t packages = 0;
  std::optional<double> ndcg;
};

struct SlopeAnalysisRow {
  Metric metric = Metric::dependents;
  std::size_t packages = 0;  // labeled packages with a history for this metric
  std::size_t detected = 0;
  std::size_t before_centrality = 0;  // detected earlier than the centrality trend
  std::size_t same_as_centrality = 0;
  std::size_t after_centrality = 0;  // later, or centrality never detected it
};

struct CorrelationSummary {
  Metric metric = Metric::dependents;
  std::vector<CorrelationResult> results;
  BucketHistogram histogram;
};

struct EvaluationResult {
  std::optional<EvalReport> npms;
  std::size_t npms_in_decline = 0;
  std::size_t npms_not_in_decline = 0;
  std::vector<EarlyDetectionRow> early_detection;
  std::vector<CorrelationSummary> correlations;
  std::vector<NdcgRow> ndcg;
  std::vector<SlopeAnalysisRow> slope_analysis;
};

EvaluationResult evaluate(const EvaluationInputs& inputs, const centrality::SeriesStore& store,
                          const detector::DetectorConfig& config = {});

/// Plain-text report tables: classification metrics and early detection.
std::string format_classification_table(const EvalReport& report);
std::string format_early_detection_table(const std::vector<EarlyDetectionRow>& rows);
std::string format_report(const EvaluationResult& result);

/// Machine-readable report; key order and number formatting are stable.
std::string report_json(const EvaluationResult& result, const detector::DetectorConfig& config);

}  // namespace decline::eval
