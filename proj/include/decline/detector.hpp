#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "decline/series_store.hpp"
#include "decline/time.hpp"

namespace decline::detector {

class TooFewPoints : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DetectorConfig {
  int window_months = 6;
  double slope_threshold = 0.0;  // v: a decline needs slope < v
  double alpha = 0.001;          // significance level for the slope test

  /// Throws std::invalid_argument unless window_months >= 3 and 0 < alpha < 1.
  void validate() const;
};

/// Least-squares line through (i, values[i]) with a significance test on
/// the slope.
struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;  // standard error of the slope
  double p_value = 1.0;    // two-sided, H0: slope = 0
  int n_points = 0;
};

/// OLS fit at x = 0..k-1. The Wald statistic (slope / std_error)^2 is
/// assessed as a squared t variate with k - 2 degrees of freedom. A perfect
/// fit yields p = 0 for a nonzero slope and p = 1 for a flat line.
/// Throws TooFewPoints when k < 2.
TrendFit fit_trend(std::span<const double> values);

enum class Status { in_decline, not_in_decline, insufficient_data };

std::string_view to_string(Status s);
Status parse_status(std::string_view s);

struct DeclineStatus {
  Status status = Status::insufficient_data;
  std::optional<TrendFit> fit;
  Month as_of;
};

struct MetricPoint {
  Month month;
  double value = 0.0;
};

/// Monthly observations with strictly increasing months. Gaps are allowed;
/// a window that spans a gap is insufficient data.
using MetricSeries = std::vector<MetricPoint>;

MetricSeries rank_series(const centrality::CentralitySeries& series);

/// Classifies the window of `window_months` months ending at `as_of`.
DeclineStatus classify(std::span<const MetricPoint> series, Month as_of, const DetectorConfig& config = {});
DeclineStatus classify(const centrality::CentralitySeries& series, Month as_of, const DetectorConfig& config = {});

/// How many months before `reference` the decline was already visible:
/// slides the window end back while it keeps classifying in decline.
/// nullopt when the package is not in decline at `reference`.
std::optional<int> earliest_detection(std::span<const MetricPoint> series, Month reference,
                                      const DetectorConfig& config = {});
std::optional<int> earliest_detection(const centrality::CentralitySeries& series, Month reference,
                                      const DetectorConfig& config = {});

/// Signed detection offset relative to `reference`: -earliest_detection when
/// already in decline there, otherwise the number of months until the first
/// in-decline window end. nullopt when the series never shows a decline.
std::optional<int> detection_latency(std::span<const MetricPoint> series, Month reference,
                                     const DetectorConfig& config = {});

}  // namespace decline::detector
