#include "decline/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/students_t.hpp>

namespace decline::detector {
namespace {

// Index of the point at `month`, or nullopt.
std::optional<std::size_t> locate(std::span<const MetricPoint> series, Month month) {
  auto it = std::lower_bound(series.begin(), series.end(), month,
                             [](const MetricPoint& p, Month m) { return p.month < m; });
  if (it == series.end() || it->month != month) return std::nullopt;
  return static_cast<std::size_t>(it - series.begin());
}

}  // namespace

void DetectorConfig::validate() const {
  if (window_months < 3) throw std::invalid_argument("window_months must be at least 3");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!std::isfinite(slope_threshold)) throw std::invalid_argument("slope_threshold must be finite");
}

TrendFit fit_trend(std::span<const double> values) {
  const std::size_t k = values.size();
  if (k < 2) throw TooFewPoints("trend fit needs at least 2 points, got " + std::to_string(k));

  TrendFit fit;
  fit.n_points = static_cast<int>(k);
  const double x_mean = static_cast<double>(k - 1) / 2.0;

  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    fit.intercept = values.front();
    return fit;  // slope 0, p = 1
  }

  double y_sum = 0.0;
  double magnitude = 0.0;
  for (double y : values) {
    y_sum += y;
    magnitude += y * y;
  }
  const double y_mean = y_sum / static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxx += dx * dx;
    sxy += dx * (values[i] - y_mean);
  }
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;

  double sse = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = (values[i] - y_mean) - fit.slope * (static_cast<double>(i) - x_mean);
    sse += r * r;
  }

  // Residuals at rounding-noise level count as an exact fit.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const bool exact = k == 2 || sse <= 64.0 * eps * eps * magnitude;
  if (exact) {
    fit.std_error = 0.0;
    fit.p_value = fit.slope != 0.0 ? 0.0 : 1.0;
    return fit;
  }

  const double dof = static_cast<double>(k - 2);
  fit.std_error = std::sqrt(sse / dof / sxx);
  const double t = fit.slope / fit.std_error;
  const boost::math::students_t dist(dof);
  fit.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
  return fit;
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::in_decline:
      return "in_decline";
    case Status::not_in_decline:
      return "not_in_decline";
    case Status::insufficient_data:
      return "insufficient_data";
  }
  return "unknown";
}

Status parse_status(std::string_view s) {
  if (s == "in_decline") return Status::in_decline;
  if (s == "not_in_decline") return Status::not_in_decline;
  if (s == "insufficient_data") return Status::insufficient_data;
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

MetricSeries rank_series(const centrality::CentralitySeries& series) {
  MetricSeries out;
  out.reserve(series.points.size());
  for (const auto& p : series.points) out.push_back({p.month, static_cast<double>(p.rank_neg)});
  return out;
}

DeclineStatus classify(std::span<const MetricPoint> series, Month as_of, const DetectorConfig& config) {
  config.validate();
  DeclineStatus result;
  result.as_of = as_of;

  const auto end = locate(series, as_of);
  const auto window = static_cast<std::size_t>(config.window_months);
  if (!end || *end + 1 < window) return result;
  const std::size_t begin = *end + 1 - window;
  // Months are strictly increasing, so the span is gap-free iff it covers
  // exactly window_months calendar months.
  if (as_of - series[begin].month != config.window_months - 1) return result;

  std::vector<double> values;
  values.reserve(window);
  for (std::size_t i = begin; i <= *end; ++i) values.push_back(series[i].value);
  result.fit = fit_trend(values);
  const bool declining = result.fit->slope < config.slope_threshold && result.fit->p_value < config.alpha;
  result.status = declining ? Status::in_decline : Status::not_in_decline;
  return result;
}

DeclineStatus classify(const centrality::CentralitySeries& series, Month as_of, const DetectorConfig& config) {
  return classify(rank_series(series), as_of, config);
}

std::optional<int> earliest_detection(std::span<const MetricPoint> series, Month reference,
                                      const DetectorConfig& config) {
  if (classify(series, reference, config).status != Status::in_decline) return std::nullopt;
  int months = 0;
  while (classify(series, reference - (months + 1), config).status == Status::in_decline) ++months;
  return months;
}

std::optional<int> earliest_detection(const centrality::CentralitySeries& series, Month reference,
                                      const DetectorConfig& config) {
  return earliest_detection(rank_series(series), reference, config);
}

std::optional<int> detection_latency(std::span<const MetricPoint> series, Month reference,
                                     const DetectorConfig& config) {
  if (auto early = earliest_detection(series, reference, config)) return -*early;
  if (series.empty()) return std::nullopt;
  for (Month m = reference.next(); m <= series.back().month; m = m.next()) {
    if (classify(series, m, config).status == Status::in_decline) return m - reference;
  }
  return std::nullopt;
}

}  // namespace decline::detector
