#include "decline/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace decline::eval {
namespace {

std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    // Positions i..j (0-based) share the average 1-based rank.
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

const std::map<std::string, double>& snapshot(const NpmsSnapshots& snaps, SnapshotChoice which) {
  switch (which) {
    case SnapshotChoice::s1:
      return snaps.s1;
    case SnapshotChoice::s2:
      return snaps.s2;
    case SnapshotChoice::s3:
      break;
  }
  return snaps.s3;
}

}  // namespace

std::string_view to_string(Label l) { return l == Label::in_decline ? "in_decline" : "not_in_decline"; }

NpmsBaseline build_npms_baseline(const NpmsSnapshots& snaps, const NpmsBaselineParams& params) {
  NpmsBaseline out;
  for (const auto& [package, s1] : snaps.s1) {
    const auto it2 = snaps.s2.find(package);
    const auto it3 = snaps.s3.find(package);
    if (it2 == snaps.s2.end() || it3 == snaps.s3.end()) continue;
    out.considered.push_back(package);
    const double s2 = it2->second;
    const double s3 = it3->second;

    const bool stable = std::abs(s2 - s1) < params.stability_tol;
    const bool good_enough = snapshot(snaps, params.min_score_at).at(package) >= params.min_score;
    if (stable && good_enough) {
      if (s2 - s3 > params.decline_delta) {
        out.labels.push_back({package, Label::in_decline, snaps.s2_month});
        continue;
      }
      if (s3 >= s2) {
        out.labels.push_back({package, Label::not_in_decline, snaps.s2_month});
        continue;
      }
    }
    out.excluded.push_back(package);
  }
  return out;
}

std::vector<BaselineLabel> labels_from_deprecations(std::span<const DeprecationRecord> records) {
  std::vector<BaselineLabel> labels;
  for (const auto& r : records) {
    if (r.real_deprecation) labels.push_back({r.package, Label::in_decline, Month::of(r.deprecated_at)});
  }
  std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.package < b.package; });
  return labels;
}

std::vector<BaselineLabel> labels_from_survey(std::span<const SurveyEntry> entries, Month reference,
                                              double threshold) {
  std::vector<BaselineLabel> labels;
  for (const auto& e : entries) {
    labels.push_back({e.package, e.satisfaction < threshold ? Label::in_decline : Label::not_in_decline, reference});
  }
  std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.package < b.package; });
  return labels;
}

EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  r.precision_defined = tp + fp > 0;
  r.precision = r.precision_defined ? static_cast<double>(tp) / static_cast<double>(tp + fp) : nan;
  r.recall_defined = tp + fn > 0;
  r.recall = r.recall_defined ? static_cast<double>(tp) / static_cast<double>(tp + fn) : nan;
  r.f1_defined = r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0;
  r.f1 = r.f1_defined ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : nan;
  return r;
}

EvalReport confusion_metrics(std::span<const BaselineLabel> labels,
                             const std::map<std::string, detector::Status>& predictions) {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& l : labels) {
    const auto it = predictions.find(l.package);
    if (it == predictions.end()) throw MissingPrediction("no prediction for " + l.package);
    const bool predicted = it->second == detector::Status::in_decline;
    if (l.label == Label::in_decline) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

double roc_auc(std::span<const BaselineLabel> labels, const std::map<std::string, double>& scores) {
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(labels.size());
  std::size_t positives = 0;
  for (const auto& l : labels) {
    const auto it = scores.find(l.package);
    const double s = it == scores.end() ? -std::numeric_limits<double>::infinity() : it->second;
    const bool pos = l.label == Label::in_decline;
    positives += pos ? 1 : 0;
    scored.emplace_back(s, pos);
  }
  const std::size_t negatives = scored.size() - positives;
  if (positives == 0 || negatives == 0) throw DegenerateLabels("ROC-AUC needs both classes");

  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double wins = 0.0;
  std::size_t negatives_below = 0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    std::size_t pos = 0, neg = 0;
    while (j < scored.size() && scored[j].first == scored[i].first) {
      scored[j].second ? ++pos : ++neg;
      ++j;
    }
    wins += static_cast<double>(pos) * static_cast<double>(negatives_below) +
            0.5 * static_cast<double>(pos) * static_cast<double>(neg);
    negatives_below += neg;
    i = j;
  }
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

Classification classify_labels(std::span<const BaselineLabel> labels, const centrality::SeriesStore& store,
                               const detector::DetectorConfig& config) {
  Classification out;
  for (const auto& l : labels) {
    detector::DeclineStatus status;
    status.as_of = l.reference_month;
    if (auto series = store.series(l.package)) status = detector::classify(*series, l.reference_month, config);
    out.predictions[l.package] = status.status;
    out.decline_scores[l.package] =
        status.fit ? -status.fit->slope : -std::numeric_limits<double>::infinity();
  }
  return out;
}

EarlyDetectionRow early_detection_report(std::string dataset, std::span<const BaselineLabel> labels,
                                         const centrality::SeriesStore& store,
                                         const detector::DetectorConfig& config) {
  EarlyDetectionRow row;
  row.dataset = std::move(dataset);
  std::vector<double> months;
  for (const auto& l : labels) {
    if (l.label != Label::in_decline) continue;
    ++row.labeled;
    const auto series = store.series(l.package);
    if (!series) continue;
    if (auto early = detector::earliest_detection(*series, l.reference_month, config)) {
      ++row.classified;
      row.months_early[l.package] = *early;
      months.push_back(static_cast<double>(*early));
    }
  }
  if (!months.empty()) {
    row.mean_months = std::accumulate(months.begin(), months.end(), 0.0) / static_cast<double>(months.size());
    row.median_months = median_of(months);
  }
  return row;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("spearman inputs differ in length");
  if (x.size() < 2) throw LengthMismatch("spearman needs at least 2 pairs");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) throw ZeroVariance("spearman undefined for a constant input");

  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::dependents:
      return "dependents";
    case Metric::downloads:
      return "downloads";
    case Metric::stars:
      return "stars";
    case Metric::forks:
      return "forks";
  }
  return "unknown";
}

Metric parse_metric(std::string_view s) {
  for (Metric m : {Metric::dependents, Metric::downloads, Metric::stars, Metric::forks}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

std::string_view to_string(Strength s) {
  static constexpr std::string_view names[] = {"very_weak", "weak", "moderate", "strong", "very_strong"};
  return names[static_cast<int>(s)];
}

Bucket correlation_bucket(double rho) {
  const double r = std::round(std::abs(rho) * 100.0) / 100.0;
  Bucket b;
  b.negative = rho < 0.0;
  if (r <= 0.19) {
    b.strength = Strength::very_weak;
  } else if (r <= 0.39) {
    b.strength = Strength::weak;
  } else if (r <= 0.69) {
    b.strength = Strength::moderate;
  } else if (r <= 0.89) {
    b.strength = Strength::strong;
  } else {
    b.strength = Strength::very_strong;
  }
  return b;
}

std::size_t BucketHistogram::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += row[0] + row[1];
  return sum;
}

BucketHistogram correlation_buckets(std::span<const CorrelationResult> results) {
  BucketHistogram h;
  for (const auto& r : results) {
    const Bucket b = correlation_bucket(r.rho);
    ++h.counts[static_cast<int>(b.strength)][b.negative ? 1 : 0];
  }
  return h;
}

std::optional<CorrelationResult> correlate(const centrality::CentralitySeries& centrality,
                                           std::span<const detector::MetricPoint> metric_series, Metric metric) {
  std::vector<double> ranks;
  std::vector<double> values;
  auto m = metric_series.begin();
  for (const auto& p : centrality.points) {
    while (m != metric_series.end() && m->month < p.month) ++m;
    if (m != metric_series.end() && m->month == p.month) {
      ranks.push_back(static_cast<double>(p.rank_neg));
      values.push_back(m->value);
    }
  }
  if (ranks.size() < 2) return std::nullopt;
  try {
    const double rho = spearman(ranks, values);
    return CorrelationResult{centrality.package, metric, rho, correlation_bucket(rho)};
  } catch (const ZeroVariance&) {
    return std::nullopt;
  }
}

double ndcg(std::span<const std::string> proposed, std::span<const std::string> ground_truth) {
  if (proposed.size() != ground_truth.size() || ground_truth.empty()) {
    throw SetMismatch("rankings must hold the same non-empty package set");
  }
  const std::size_t k = ground_truth.size();
  std::unordered_map<std::string_view, double> relevance;
  for (std::size_t i = 0; i < k; ++i) {
    if (!relevance.emplace(ground_truth[i], static_cast<double>(k - (i + 1))).second) {
      throw SetMismatch("duplicate package in ground truth: " + ground_truth[i]);
    }
  }
  std::set<std::string_view> seen;
  double dcg = 0.0;
  double ideal = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto it = relevance.find(proposed[i]);
    if (it == relevance.end() || !seen.insert(proposed[i]).second) {
      throw SetMismatch("proposed ranking differs from ground truth at " + proposed[i]);
    }
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += it->second / discount;
    ideal += static_cast<double>(k - (i + 1)) / discount;
  }
  if (ideal == 0.0) return 1.0;  // only when k == 1
  return dcg / ideal;
}

std::optional<int> slope_analysis_for_metric(std::span<const detector::MetricPoint> metric_series, Month reference,
                                             const detector::DetectorConfig& config) {
  return detector::detection_latency(metric_series, reference, config);
}

}  // namespace decline::eval
