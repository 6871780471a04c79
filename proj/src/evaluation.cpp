#include "decline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "csv.hpp"
#include "json.hpp"

namespace decline::eval {
namespace {

using detail::CsvError;
using detail::parse_double;
using detail::read_csv;
using ordered_json = nlohmann::ordered_json;

bool parse_flag(const detail::CsvRow& row, std::size_t i) {
  const auto& f = row.fields[i];
  if (f == "true" || f == "1" || f == "yes") return true;
  if (f == "false" || f == "0" || f == "no") return false;
  throw CsvError("line " + std::to_string(row.line) + ": bad flag '" + f + "'");
}

double share_of(const SurveyEntry& e, std::string_view category) {
  if (category == "awareness") return e.awareness;
  if (category == "usage") return e.usage;
  if (category == "interest") return e.interest;
  return e.satisfaction;
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json number_or_null(double v, bool defined) { return defined ? ordered_json(v) : ordered_json(nullptr); }

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::map<std::string, double> read_npms_snapshot(std::istream& in) {
  std::map<std::string, double> scores;
  for (const auto& row : read_csv(in, {"package", "score"})) {
    const double s = parse_double(row, 1);
    if (s < 0.0 || s > 1.0) throw CsvError("line " + std::to_string(row.line) + ": npms score outside [0, 1]");
    if (!scores.emplace(row.fields[0], s).second) {
      throw CsvError("line " + std::to_string(row.line) + ": duplicate package " + row.fields[0]);
    }
  }
  return scores;
}

std::vector<DeprecationRecord> read_deprecations(std::istream& in) {
  std::vector<DeprecationRecord> out;
  for (const auto& row : read_csv(in, {"package", "date", "is_real_deprecation"})) {
    DeprecationRecord r;
    r.package = row.fields[0];
    const auto& date = row.fields[1];
    try {
      r.deprecated_at = parse_rfc3339(date.size() == 10 ? date + "T00:00:00Z" : date);
    } catch (const std::invalid_argument& e) {
      throw CsvError("line " + std::to_string(row.line) + ": " + e.what());
    }
    r.real_deprecation = parse_flag(row, 2);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurveyEntry> read_survey(std::istream& in) {
  std::vector<SurveyEntry> out;
  for (const auto& row : read_csv(in, {"package", "awareness", "usage", "interest", "satisfaction"})) {
    SurveyEntry e{row.fields[0], parse_double(row, 1), parse_double(row, 2), parse_double(row, 3),
                  parse_double(row, 4)};
    for (double v : {e.awareness, e.usage, e.interest, e.satisfaction}) {
      if (v < 0.0 || v > 1.0) throw CsvError("line " + std::to_string(row.line) + ": share outside [0, 1]");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::map<std::string, detector::MetricSeries> read_metric_history(std::istream& in) {
  std::map<std::string, detector::MetricSeries> out;
  for (const auto& row : read_csv(in, {"package", "month", "value"})) {
    Month month;
    try {
      month = Month::parse(row.fields[1]);
    } catch (const std::invalid_argument& e) {
      throw CsvError("line " + std::to_string(row.line) + ": " + e.what());
    }
    out[row.fields[0]].push_back({month, parse_double(row, 2)});
  }
  for (auto& [package, series] : out) {
    std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.month < b.month; });
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].month == series[i - 1].month) {
        throw CsvError("duplicate month " + series[i].month.to_string() + " for " + package);
      }
    }
  }
  return out;
}

EvaluationResult evaluate(const EvaluationInputs& inputs, const centrality::SeriesStore& store,
                          const detector::DetectorConfig& config) {
  config.validate();
  EvaluationResult result;

  if (inputs.npms) {
    const auto baseline = build_npms_baseline(*inputs.npms, inputs.npms_params);
    for (const auto& l : baseline.labels) {
      (l.label == Label::in_decline ? result.npms_in_decline : result.npms_not_in_decline)++;
    }
    const auto classified = classify_labels(baseline.labels, store, config);
    auto report = confusion_metrics(baseline.labels, classified.predictions);
    if (result.npms_in_decline > 0 && result.npms_not_in_decline > 0) {
      report.roc_auc = roc_auc(baseline.labels, classified.decline_scores);
    }
    result.npms = report;
    result.early_detection.push_back(early_detection_report("npms", baseline.labels, store, config));
  }

  std::vector<BaselineLabel> deprecated_labels;
  if (inputs.deprecations) {
    deprecated_labels = labels_from_deprecations(*inputs.deprecations);
    result.early_detection.push_back(early_detection_report("deprecated", deprecated_labels, store, config));
  }

  if (inputs.survey) {
    const auto labels = labels_from_survey(*inputs.survey, inputs.survey_month);
    result.early_detection.push_back(early_detection_report("survey", labels, store, config));

    const auto* column = store.column_for(inputs.survey_month);
    std::vector<const SurveyEntry*> ranked;
    if (column != nullptr) {
      for (const auto& e : *inputs.survey) {
        if (auto id = store.find(e.package); id && *id < column->ranks.size()) ranked.push_back(&e);
      }
    }
    for (const std::string_view category : {"awareness", "usage", "interest", "satisfaction"}) {
      NdcgRow row;
      row.category = std::string(category);
      row.packages = ranked.size();
      if (!ranked.empty()) {
        auto by_centrality = ranked;
        std::sort(by_centrality.begin(), by_centrality.end(), [&](const SurveyEntry* a, const SurveyEntry* b) {
          const auto ra = column->ranks[*store.find(a->package)];
          const auto rb = column->ranks[*store.find(b->package)];
          return ra != rb ? ra > rb : a->package < b->package;
        });
        auto by_survey = ranked;
        std::sort(by_survey.begin(), by_survey.end(), [&](const SurveyEntry* a, const SurveyEntry* b) {
          const double sa = share_of(*a, category);
          const double sb = share_of(*b, category);
          return sa != sb ? sa > sb : a->package < b->package;
        });
        std::vector<std::string> proposed, truth;
        for (const auto* e : by_centrality) proposed.push_back(e->package);
        for (const auto* e : by_survey) truth.push_back(e->package);
        row.ndcg = ndcg(proposed, truth);
      }
      result.ndcg.push_back(std::move(row));
    }
  }

  for (const auto& [metric, histories] : inputs.metrics) {
    CorrelationSummary summary;
    summary.metric = metric;
    for (const auto& [package, series] : histories) {
      const auto centrality_series = store.series(package);
      if (!centrality_series) continue;
      if (auto r = correlate(*centrality_series, series, metric)) summary.results.push_back(std::move(*r));
    }
    summary.histogram = correlation_buckets(summary.results);
    result.correlations.push_back(std::move(summary));

    if (!deprecated_labels.empty()) {
      SlopeAnalysisRow row;
      row.metric = metric;
      for (const auto& l : deprecated_labels) {
        const auto it = histories.find(l.package);
        if (it == histories.end()) continue;
        ++row.packages;
        const auto metric_latency = slope_analysis_for_metric(it->second, l.reference_month, config);
        if (!metric_latency) continue;
        ++row.detected;
        std::optional<int> centrality_latency;
        if (auto s = store.series(l.package)) {
          centrality_latency = detector::detection_latency(detector::rank_series(*s), l.reference_month, config);
        }
        if (!centrality_latency || *metric_latency > *centrality_latency) {
          ++row.after_centrality;
        } else if (*metric_latency < *centrality_latency) {
          ++row.before_centrality;
        } else {
          ++row.same_as_centrality;
        }
      }
      result.slope_analysis.push_back(row);
    }
  }
  return result;
}

std::string format_classification_table(const EvalReport& r) {
  std::ostringstream out;
  out << "Metric                 Value\n";
  out << "True Positive (Tp)     " << r.tp << '\n';
  out << "False Positive (Fp)    " << r.fp << '\n';
  out << "False Negative (Fn)    " << r.fn << '\n';
  out << "True Negative (Tn)     " << r.tn << '\n';
  out << "Precision (P)          " << fixed(r.precision, 2) << '\n';
  out << "Recall (R)             " << fixed(r.recall, 2) << '\n';
  out << "F1-score (F1)          " << fixed(r.f1, 2) << '\n';
  out << "ROC-AUC                " << (r.roc_auc ? fixed(*r.roc_auc, 2) : std::string("n/a")) << '\n';
  return out.str();
}

std::string format_early_detection_table(const std::vector<EarlyDetectionRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %10s %12s %8s %8s\n", "Dataset", "#Labeled", "#Classified", "Mean",
                "Median");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %10zu %12zu %8s %8s\n", r.dataset.c_str(), r.labeled, r.classified,
                  r.mean_months ? fixed(*r.mean_months, 2).c_str() : "n/a",
                  r.median_months ? fixed(*r.median_months, 2).c_str() : "n/a");
    out << line;
  }
  return out.str();
}

std::string format_report(const EvaluationResult& result) {
  std::ostringstream out;
  if (result.npms) {
    out << "Classification against the npms baseline (" << result.npms_in_decline << " in decline, "
        << result.npms_not_in_decline << " not in decline)\n";
    out << format_classification_table(*result.npms) << '\n';
  }
  if (!result.early_detection.empty()) {
    out << "How early (months) packages in decline are detected\n" << format_early_detection_table(result.early_detection) << '\n';
  }
  if (!result.ndcg.empty()) {
    out << "NDCG of centrality ranking against survey rankings\n";
    for (const auto& r : result.ndcg) {
      out << "  " << r.category << ": " << (r.ndcg ? fixed(*r.ndcg, 4) : std::string("n/a")) << " (" << r.packages
          << " packages)\n";
    }
    out << '\n';
  }
  for (const auto& c : result.correlations) {
    out << "Spearman correlation of centrality rank with " << to_string(c.metric) << " (" << c.results.size()
        << " packages)\n";
    for (int s = 0; s < 5; ++s) {
      out << "  " << to_string(static_cast<Strength>(s)) << ": +" << c.histogram.counts[s][0] << " / -"
          << c.histogram.counts[s][1] << '\n';
    }
  }
  if (!result.slope_analysis.empty()) {
    out << "\nSlope analysis of raw metrics on deprecated packages\n";
    for (const auto& r : result.slope_analysis) {
      out << "  " << to_string(r.metric) << ": detected " << r.detected << " of " << r.packages << " (before "
          << r.before_centrality << ", same " << r.same_as_centrality << ", after " << r.after_centrality << ")\n";
    }
  }
  return out.str();
}

std::string report_json(const EvaluationResult& result, const detector::DetectorConfig& config) {
  ordered_json j;
  j["detector"] = {{"window_months", config.window_months},
                   {"slope_threshold", config.slope_threshold},
                   {"alpha", config.alpha}};
  if (result.npms) {
    const auto& r = *result.npms;
    j["npms"] = {{"in_decline_labels", result.npms_in_decline},
                 {"not_in_decline_labels", result.npms_not_in_decline},
                 {"tp", r.tp},
                 {"fp", r.fp},
                 {"fn", r.fn},
                 {"tn", r.tn},
                 {"precision", number_or_null(r.precision, r.precision_defined)},
                 {"recall", number_or_null(r.recall, r.recall_defined)},
                 {"f1", number_or_null(r.f1, r.f1_defined)},
                 {"roc_auc", optional_json(r.roc_auc)}};
  }
  ordered_json rows = ordered_json::array();
  for (const auto& r : result.early_detection) {
    ordered_json per_package = ordered_json::object();
    for (const auto& [package, months] : r.months_early) per_package[package] = months;
    rows.push_back({{"dataset", r.dataset},
                    {"labeled", r.labeled},
                    {"classified", r.classified},
                    {"mean_months", optional_json(r.mean_months)},
                    {"median_months", optional_json(r.median_months)},
                    {"months_early", per_package}});
  }
  j["early_detection"] = rows;
  ordered_json ndcg_rows = ordered_json::array();
  for (const auto& r : result.ndcg) {
    ndcg_rows.push_back({{"category", r.category}, {"packages", r.packages}, {"ndcg", optional_json(r.ndcg)}});
  }
  j["ndcg"] = ndcg_rows;
  ordered_json corr = ordered_json::array();
  for (const auto& c : result.correlations) {
    ordered_json hist = ordered_json::object();
    for (int s = 0; s < 5; ++s) {
      hist[std::string(to_string(static_cast<Strength>(s)))] = {{"positive", c.histogram.counts[s][0]},
                                                                 {"negative", c.histogram.counts[s][1]}};
    }
    ordered_json per_package = ordered_json::array();
    for (const auto& r : c.results) {
      per_package.push_back({{"package", r.package},
                             {"rho", r.rho},
                             {"strength", to_string(r.bucket.strength)},
                             {"negative", r.bucket.negative}});
    }
    corr.push_back({{"metric", to_string(c.metric)}, {"histogram", hist}, {"packages", per_package}});
  }
  j["correlations"] = corr;
  ordered_json slope = ordered_json::array();
  for (const auto& r : result.slope_analysis) {
    slope.push_back({{"metric", to_string(r.metric)},
                     {"packages", r.packages},
                     {"detected", r.detected},
                     {"before_centrality", r.before_centrality},
                     {"same_as_centrality", r.same_as_centrality},
                     {"after_centrality", r.after_centrality}});
  }
  j["slope_analysis"] = slope;
  return j.dump(2) + '\n';
}

}  // namespace decline::eval
