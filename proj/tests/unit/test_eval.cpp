#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "decline/eval.hpp"
#include "oracles.hpp"

using namespace decline;
using namespace decline::eval;
using decline::detector::Status;

namespace {

std::vector<BaselineLabel> labels_of(const std::vector<std::pair<std::string, bool>>& xs) {
  std::vector<BaselineLabel> out;
  for (const auto& [p, pos] : xs) out.push_back({p, pos ? Label::in_decline : Label::not_in_decline, Month{2019, 4}});
  return out;
}

// Series whose ranks stay flat until `onset` (index) and then fall by 10 a month.
centrality::SeriesStore store_with(const std::map<std::string, int>& onsets, Month start, int months) {
  centrality::SeriesStore store;
  std::vector<std::string> names;
  for (const auto& [n, o] : onsets) names.push_back(n);
  for (int i = 0; i < months; ++i) {
    std::vector<double> scores;
    std::vector<std::int32_t> ranks;
    for (const auto& [n, onset] : onsets) {
      scores.push_back(0.0);
      const int drop = (onset >= 0 && i > onset) ? (i - onset) * 10 : 0;
      ranks.push_back(-100 - drop);
    }
    store.append(start + i, names, scores, ranks);
  }
  return store;
}

}  // namespace

TEST_CASE("npms baseline rules") {
  NpmsSnapshots s;
  s.s1 = {{"decl", 0.95}, {"unstable", 0.80}, {"steady", 0.90}, {"mild", 0.92}, {"low", 0.5}, {"gone", 0.9}};
  s.s2 = {{"decl", 0.95}, {"unstable", 0.90}, {"steady", 0.905}, {"mild", 0.92}, {"low", 0.5}};
  s.s3 = {{"decl", 0.70}, {"unstable", 0.90}, {"steady", 0.91}, {"mild", 0.85}, {"low", 0.5}};
  const auto b = build_npms_baseline(s);
  const std::vector<BaselineLabel> expected = {
      {"decl", Label::in_decline, Month{2019, 4}},
      {"steady", Label::not_in_decline, Month{2019, 4}},
  };
  CHECK(b.labels == expected);
  CHECK(b.considered == std::vector<std::string>{"decl", "low", "mild", "steady", "unstable"});
  CHECK(b.excluded == std::vector<std::string>{"low", "mild", "unstable"});

  // Minimum score checked at S2 instead lets a lower S3 through.
  NpmsBaselineParams at_s2;
  at_s2.min_score_at = SnapshotChoice::s2;
  s.s3["decl"] = 0.6;
  CHECK(build_npms_baseline(s, at_s2).labels.size() == 2);
  CHECK(build_npms_baseline(s).labels.size() == 1);
}

TEST_CASE("npms baseline against a brute rule oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  NpmsSnapshots s;
  for (int i = 0; i < 3000; ++i) {
    const std::string p = "p" + std::to_string(i);
    const double s1 = std::round(u(rng) * 100) / 100;
    const double s2 = (u(rng) < 0.6) ? s1 + (u(rng) - 0.5) * 0.015 : u(rng);
    const double s3 = (u(rng) < 0.5) ? s2 - u(rng) * 0.4 : s2 + u(rng) * 0.05;
    if (u(rng) < 0.95) s.s1[p] = s1;
    if (u(rng) < 0.95) s.s2[p] = s2;
    if (u(rng) < 0.95) s.s3[p] = s3;
  }
  const auto b = build_npms_baseline(s);
  std::size_t pos = 0, neg = 0, considered = 0;
  for (const auto& [p, s1] : s.s1) {
    if (!s.s2.count(p) || !s.s3.count(p)) continue;
    ++considered;
    const double s2 = s.s2.at(p), s3 = s.s3.at(p);
    if (!(std::abs(s2 - s1) < 0.01) || !(s3 >= 0.7)) continue;
    if (s2 - s3 > 0.2) ++pos;
    else if (s3 >= s2) ++neg;
  }
  std::size_t got_pos = 0;
  for (const auto& l : b.labels) got_pos += l.label == Label::in_decline;
  CHECK(got_pos == pos);
  CHECK(b.labels.size() - got_pos == neg);
  CHECK(b.considered.size() == considered);
  CHECK(b.excluded.size() + b.labels.size() == considered);
}

TEST_CASE("published confusion counts") {
  const auto r = metrics_from_counts(1969, 498, 290, 1700);
  CHECK(r.precision == doctest::Approx(0.798).epsilon(0.001));
  CHECK(std::abs(r.precision - 0.80) <= 0.005);
  CHECK(std::abs(r.recall - 0.87) <= 0.005);
  CHECK(std::abs(r.f1 - 0.83) <= 0.005);
  CHECK(r.tp + r.fn == 2259);
  CHECK(r.fp + r.tn == 2198);
}

TEST_CASE("confusion metrics from labels") {
  const auto labels = labels_of({{"a", true}, {"b", true}, {"c", false}, {"d", false}});
  std::map<std::string, Status> perfect = {
      {"a", Status::in_decline}, {"b", Status::in_decline}, {"c", Status::not_in_decline}, {"d", Status::insufficient_data}};
  const auto r = confusion_metrics(labels, perfect);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);

  std::map<std::string, Status> none = {
      {"a", Status::insufficient_data}, {"b", Status::not_in_decline}, {"c", Status::not_in_decline}, {"d", Status::not_in_decline}};
  const auto z = confusion_metrics(labels, none);
  CHECK(!z.precision_defined);
  CHECK(std::isnan(z.precision));
  CHECK(z.recall == 0.0);
  CHECK(!z.f1_defined);

  none.erase("d");
  CHECK_THROWS_AS(confusion_metrics(labels, none), MissingPrediction);
}

TEST_CASE("roc auc") {
  const auto labels = labels_of({{"a", true}, {"b", true}, {"c", false}, {"d", false}});
  CHECK(roc_auc(labels, {{"a", 3}, {"b", 2}, {"c", 1}, {"d", 0}}) == 1.0);
  CHECK(roc_auc(labels, {{"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}}) == 0.5);
  CHECK(roc_auc(labels, {{"a", 0}, {"b", 1}, {"c", 2}, {"d", 3}}) == 0.0);
  // missing scores are -inf
  CHECK(roc_auc(labels, {{"a", 1}, {"b", 1}}) == 1.0);
  CHECK_THROWS_AS(roc_auc(labels_of({{"a", true}}), {}), DegenerateLabels);

  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::pair<std::string, bool>> xs;
    std::map<std::string, double> scores;
    std::vector<std::pair<double, bool>> items;
    for (int i = 0; i < 200; ++i) {
      const std::string p = "p" + std::to_string(i);
      const bool pos = i < 2 || (i >= 2 && i < 4 ? false : rng() % 3 == 0);
      const double s = static_cast<double>(rng() % 40) - (pos ? 5.0 : 0.0);
      xs.emplace_back(p, pos);
      scores[p] = s;
      items.emplace_back(s, pos);
    }
    const auto got = roc_auc(labels_of(xs), scores);
    CHECK(std::abs(got - oracle::pairwise_auc(items)) < 1e-12);
    // strictly monotone transform
    std::map<std::string, double> t;
    for (const auto& [k, v] : scores) t[k] = std::exp(v / 10.0) * 3 - 7;
    CHECK(std::abs(roc_auc(labels_of(xs), t) - got) < 1e-12);
  }
}

TEST_CASE("spearman") {
  const std::vector<double> x = {1, 2, 2, 3, 5, 5, 5, 8};
  const std::vector<double> y = {2, 1, 4, 4, 3, 9, 9, 7};
  // scipy.stats.spearmanr
  CHECK(std::abs(spearman(x, y) - 0.6895607149652165) < 1e-12);
  CHECK(spearman(x, y) == doctest::Approx(spearman(y, x)).epsilon(1e-15));
  const std::vector<double> a = {1, 2, 3, 4}, rev = {40, 30, 20, 10};
  CHECK(spearman(a, a) == doctest::Approx(1.0));
  CHECK(spearman(a, rev) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman(a, std::vector<double>{1, 2}), LengthMismatch);
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), LengthMismatch);
  CHECK_THROWS_AS(spearman(a, std::vector<double>{5, 5, 5, 5}), ZeroVariance);

  std::mt19937_64 rng(6);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = static_cast<double>(rng() % 6);
      v[i] = static_cast<double>(rng() % 6);
    }
    u[0] = 0, u[1] = 1, v[0] = 0, v[1] = 1;  // never constant
    CHECK(std::abs(spearman(u, v) - oracle::spearman(u, v)) < 1e-9);
    std::vector<double> cubed = u;
    for (auto& c : cubed) c = c * c * c + 1;
    CHECK(std::abs(spearman(cubed, v) - spearman(u, v)) < 1e-12);
  }
}

TEST_CASE("fowler buckets") {
  CHECK(correlation_bucket(0.75) == Bucket{Strength::strong, false});
  CHECK(correlation_bucket(0.0) == Bucket{Strength::very_weak, false});
  CHECK(correlation_bucket(-0.95) == Bucket{Strength::very_strong, true});
  CHECK(correlation_bucket(0.194) == Bucket{Strength::very_weak, false});
  CHECK(correlation_bucket(0.196) == Bucket{Strength::weak, false});
  CHECK(correlation_bucket(-0.395) == Bucket{Strength::moderate, true});
  CHECK(correlation_bucket(0.69) == Bucket{Strength::moderate, false});
  CHECK(correlation_bucket(0.895) == Bucket{Strength::very_strong, false});
  CHECK(correlation_bucket(1.0) == Bucket{Strength::very_strong, false});

  std::vector<CorrelationResult> rs = {{"a", Metric::stars, 0.5, {}}, {"b", Metric::stars, -0.5, {}},
                                       {"c", Metric::stars, 0.55, {}}, {"d", Metric::stars, 0.1, {}}};
  const auto h = correlation_buckets(rs);
  CHECK(h.at({Strength::moderate, false}) == 2);
  CHECK(h.at({Strength::moderate, true}) == 1);
  CHECK(h.at({Strength::very_weak, false}) == 1);
  CHECK(h.total() == 4);
}

TEST_CASE("correlate over common months") {
  centrality::CentralitySeries cs{"p", {}};
  for (int i = 0; i < 8; ++i) cs.points.push_back({Month{2019, 1} + i, 0.1f, -50 + i});
  detector::MetricSeries stars;
  for (int i = 2; i < 12; ++i) stars.push_back({Month{2019, 1} + i, 10.0 * i});
  const auto r = correlate(cs, stars, Metric::stars);
  REQUIRE(r);
  CHECK(r->rho == doctest::Approx(1.0));
  CHECK(r->bucket == Bucket{Strength::very_strong, false});
  detector::MetricSeries flat = {{Month{2019, 1}, 3}, {Month{2019, 2}, 3}};
  CHECK(!correlate(cs, flat, Metric::forks));
  CHECK(!correlate(cs, {}, Metric::forks));
}

TEST_CASE("ndcg") {
  const std::vector<std::string> gt = {"a", "b", "c"};
  CHECK(ndcg(gt, gt) == 1.0);
  const std::vector<std::string> rev = {"c", "b", "a"};
  // (0 + 1/log2(3) + 2/log2(4)) / (2 + 1/log2(3) + 0), evaluated by hand
  CHECK(std::abs(ndcg(rev, gt) - 0.6199062332840657) < 1e-12);
  const std::vector<std::string> one = {"x"};
  CHECK(ndcg(one, one) == 1.0);
  CHECK_THROWS_AS(ndcg(std::vector<std::string>{"a", "b", "d"}, gt), SetMismatch);
  CHECK_THROWS_AS(ndcg(std::vector<std::string>{"a", "b"}, gt), SetMismatch);
  CHECK_THROWS_AS(ndcg(std::vector<std::string>{"a", "a", "b"}, gt), SetMismatch);

  std::mt19937_64 rng(9);
  std::vector<std::string> truth;
  for (int i = 0; i < 8; ++i) truth.push_back("k" + std::to_string(i));
  for (int round = 0; round < 100; ++round) {
    auto p = truth;
    std::shuffle(p.begin(), p.end(), rng);
    const double v = ndcg(p, truth);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    CHECK((v == 1.0) == (p == truth));
  }
}

TEST_CASE("early detection report on planted declines") {
  // Ranks are flat through the onset index and then fall 10 a month. The
  // first window to clear alpha ends at onset + 4 (p ~ 4.8e-4), and every
  // later window stays in decline.
  const Month start{2018, 1};
  const auto store = store_with({{"early", 3}, {"late", 8}, {"never", -1}}, start, 24);
  const Month ref = start + 20;
  const std::vector<BaselineLabel> labels = {{"early", Label::in_decline, ref},
                                             {"late", Label::in_decline, ref},
                                             {"never", Label::in_decline, ref},
                                             {"unknown", Label::in_decline, ref},
                                             {"neg", Label::not_in_decline, ref}};
  const auto row = early_detection_report("synthetic", labels, store);
  CHECK(row.dataset == "synthetic");
  CHECK(row.labeled == 4);
  CHECK(row.classified == 2);
  CHECK(row.months_early.at("early") == 20 - (3 + 4));
  CHECK(row.months_early.at("late") == 20 - (8 + 4));
  CHECK(*row.mean_months == 10.5);
  CHECK(*row.median_months == 10.5);

  const auto none = early_detection_report("empty", {}, store);
  CHECK(!none.mean_months);
}

TEST_CASE("classify_labels scores") {
  const Month start{2018, 1};
  const auto store = store_with({{"early", 3}, {"never", -1}}, start, 24);
  const std::vector<BaselineLabel> labels = {{"early", Label::in_decline, start + 20},
                                             {"never", Label::not_in_decline, start + 20},
                                             {"young", Label::not_in_decline, start + 2},
                                             {"absent", Label::not_in_decline, start + 20}};
  const auto c = classify_labels(labels, store);
  CHECK(c.predictions.at("early") == Status::in_decline);
  CHECK(c.predictions.at("never") == Status::not_in_decline);
  CHECK(c.predictions.at("young") == Status::insufficient_data);
  CHECK(c.predictions.at("absent") == Status::insufficient_data);
  CHECK(c.decline_scores.at("early") == doctest::Approx(10.0));
  CHECK(c.decline_scores.at("never") == 0.0);
  CHECK(c.decline_scores.at("absent") == -std::numeric_limits<double>::infinity());
}

TEST_CASE("slope analysis on raw metrics") {
  detector::MetricSeries rising;
  for (int i = 0; i < 24; ++i) rising.push_back({Month{2018, 1} + i, 100.0 + 5 * i});
  CHECK(!slope_analysis_for_metric(rising, Month{2019, 6}));

  detector::MetricSeries dropping;
  const Month ref{2019, 6};
  for (int i = 0; i < 24; ++i) {
    const Month m = Month{2018, 1} + i;
    const int since = (m - ref) + 11;  // the drop starts 11 months before ref
    dropping.push_back({m, since > 0 ? 500.0 - 20.0 * since : 500.0});
  }
  const auto latency = slope_analysis_for_metric(dropping, ref);
  REQUIRE(latency);
  CHECK(*latency < 0);
}
