#include "decline/service.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace decline::service {
namespace {

using ordered_json = nlohmann::ordered_json;

Response error_response(int status, std::string_view message) {
  ordered_json j;
  j["error"] = message;
  return {status, j.dump()};
}

ordered_json fit_json(const std::optional<detector::TrendFit>& fit) {
  if (!fit) return nullptr;
  ordered_json j;
  j["slope"] = fit->slope;
  j["intercept"] = fit->intercept;
  j["std_error"] = fit->std_error;
  j["p_value"] = fit->p_value;
  j["n_points"] = fit->n_points;
  return j;
}

std::vector<int> parse_cron_field(std::string_view field, int lo, int hi) {
  if (field == "*") return {};
  std::vector<int> values;
  std::size_t start = 0;
  while (true) {
    const auto comma = field.find(',', start);
    const auto part = field.substr(start, comma == std::string_view::npos ? field.npos : comma - start);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v < lo || v > hi) {
      throw std::invalid_argument("bad cron field '" + std::string(field) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::sort(values.begin(), values.end());
  return values;
}

}  // namespace

ServedStore::ServedStore(centrality::SeriesStore store, const detector::DetectorConfig& config)
    : store_(std::move(store)) {
  config.validate();
  statuses_.resize(store_.package_count());
  const auto as_of = store_.last_month();
  if (!as_of) return;
  const std::size_t window = static_cast<std::size_t>(config.window_months);
  const std::size_t columns = store_.month_count();
  const std::size_t first = columns >= window ? columns - window : 0;
  detector::MetricSeries tail;
  for (std::uint32_t id = 0; id < statuses_.size(); ++id) {
    tail.clear();
    for (std::size_t c = first; c < columns; ++c) {
      const auto& column = store_.column(c);
      if (id < column.ranks.size()) tail.push_back({column.month, static_cast<double>(column.ranks[id])});
    }
    statuses_[id] = detector::classify(tail, *as_of, config);
  }
}

std::string to_json(const PackageStatusView& view) {
  ordered_json j;
  j["package"] = view.package;
  j["computed_at"] = view.computed_at.to_string();
  ordered_json series = ordered_json::array();
  for (const auto& [month, rank] : view.series) series.push_back({{"month", month.to_string()}, {"rank_neg", rank}});
  j["series"] = series;
  ordered_json gaps = ordered_json::array();
  for (const auto& m : view.gaps) gaps.push_back(m.to_string());
  j["gaps"] = gaps;
  j["decline"] = {{"status", detector::to_string(view.decline.status)},
                  {"as_of", view.decline.as_of.to_string()},
                  {"fit", fit_json(view.decline.fit)}};
  return j.dump();
}

CronSchedule CronSchedule::parse(std::string_view expression) {
  std::istringstream in{std::string(expression)};
  std::vector<std::string> parts;
  for (std::string p; in >> p;) parts.push_back(p);
  if (parts.size() != 5) throw std::invalid_argument("cron expression needs 5 fields: '" + std::string(expression) + "'");
  static constexpr int bounds[5][2] = {{0, 59}, {0, 23}, {1, 31}, {1, 12}, {0, 6}};
  CronSchedule s;
  for (int i = 0; i < 5; ++i) s.fields_[i] = parse_cron_field(parts[i], bounds[i][0], bounds[i][1]);
  return s;
}

bool CronSchedule::matches(Timestamp minute) const {
  using namespace std::chrono;
  const auto day = floor<days>(minute);
  const year_month_day ymd{day};
  const hh_mm_ss hms{minute - day};
  const int values[5] = {static_cast<int>(hms.minutes().count()), static_cast<int>(hms.hours().count()),
                         static_cast<int>(static_cast<unsigned>(ymd.day())),
                         static_cast<int>(static_cast<unsigned>(ymd.month())),
                         static_cast<int>(weekday{day}.c_encoding())};
  for (int i = 0; i < 5; ++i) {
    if (!fields_[i].empty() && !std::binary_search(fields_[i].begin(), fields_[i].end(), values[i])) return false;
  }
  return true;
}

Timestamp CronSchedule::next_after(Timestamp after) const {
  using namespace std::chrono;
  Timestamp t = floor<minutes>(after) + minutes{1};
  // Eight years covers any satisfiable day/month/weekday combination.
  const Timestamp limit = t + days{366 * 8};
  for (; t < limit; t += minutes{1}) {
    if (matches(t)) return t;
  }
  throw std::invalid_argument("cron schedule never fires");
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  config_.detector.validate();
  config_.pagerank.validate();
}

void Service::load(centrality::SeriesStore store, std::vector<ingest::DependencyChangeEvent> events) {
  auto served = std::make_shared<const ServedStore>(store, config_.detector);
  auto pipeline = std::make_unique<centrality::MonthlyPipeline>(config_.pagerank, std::move(store));
  pipeline->append_events(events);
  {
    std::lock_guard lock(update_mutex_);
    pipeline_ = std::move(pipeline);
  }
  std::lock_guard lock(swap_mutex_);
  current_ = std::move(served);
}

std::shared_ptr<const ServedStore> Service::current() const {
  std::lock_guard lock(swap_mutex_);
  return current_;
}

std::size_t Service::event_count() const {
  std::lock_guard lock(update_mutex_);
  return pipeline_ ? pipeline_->events().size() : 0;
}

std::optional<PackageStatusView> Service::package_status(std::string_view name, int months) const {
  const auto served = current();
  if (!served || !served->computed_at()) return std::nullopt;
  const auto& store = served->store();
  const auto id = store.find(name);
  if (!id) return std::nullopt;

  PackageStatusView view;
  view.package = std::string(name);
  view.computed_at = *served->computed_at();
  view.decline = served->status(*id);
  const Month first = view.computed_at - (months - 1);
  for (Month m = first; m <= view.computed_at; m = m.next()) {
    const auto* column = store.column_for(m);
    if (column != nullptr && *id < column->ranks.size()) {
      view.series.emplace_back(m, column->ranks[*id]);
    } else if (!view.series.empty()) {
      view.gaps.push_back(m);
    }
  }
  return view;
}

Response Service::get_package_status(std::string_view name, std::optional<std::string_view> months_param) const {
  int months = config_.default_months;
  if (months_param) {
    const auto [ptr, ec] = std::from_chars(months_param->data(), months_param->data() + months_param->size(), months);
    if (ec != std::errc{} || ptr != months_param->data() + months_param->size() || months < 1 || months > 10000) {
      return error_response(400, "months must be a positive integer");
    }
  }
  const auto served = current();
  if (!served || !served->computed_at()) return error_response(503, "store unavailable");
  const auto view = package_status(name, months);
  if (!view) return error_response(404, "unknown package");
  return {200, to_json(*view)};
}

Response Service::health() const {
  const auto served = current();
  ordered_json j;
  j["status"] = served ? "ok" : "unavailable";
  const auto at = served ? served->computed_at() : std::nullopt;
  j["computed_at"] = at ? ordered_json(at->to_string()) : ordered_json(nullptr);
  j["packages"] = served ? served->store().package_count() : 0;
  j["months"] = served ? served->store().month_count() : 0;
  return {served ? 200 : 503, j.dump()};
}

UpdateSummary Service::run_update_cycle(std::span<const ingest::DependencyChangeEvent> delta, Timestamp now) {
  const auto started = std::chrono::steady_clock::now();
  std::lock_guard lock(update_mutex_);
  if (!pipeline_) {
    pipeline_ = std::make_unique<centrality::MonthlyPipeline>(config_.pagerank);
  }
  const std::size_t committed = pipeline_->events().size();
  UpdateSummary summary;
  try {
    pipeline_->append_events(delta);
    // Only months that have fully elapsed are ranked.
    const Month through = Month::of(now).prev();
    const auto result = pipeline_->run(config_.start_month, through);
    summary.months_advanced = result.months_processed;
    summary.packages_ranked = result.packages_ranked;
    if (result.months_processed > 0) {
      auto served = std::make_shared<const ServedStore>(pipeline_->store(), config_.detector);
      if (config_.store_path) served->store().save(*config_.store_path);
      std::lock_guard swap(swap_mutex_);
      current_ = std::move(served);
    }
  } catch (...) {
    // Rebuild the updater from the last served store and the committed log.
    std::vector<ingest::DependencyChangeEvent> events(pipeline_->events().begin(),
                                                      pipeline_->events().begin() + static_cast<std::ptrdiff_t>(committed));
    const auto served = current();
    pipeline_ = std::make_unique<centrality::MonthlyPipeline>(
        config_.pagerank, served ? served->store() : centrality::SeriesStore{});
    pipeline_->append_events(events);
    throw;
  }
  summary.computed_at = pipeline_->store().last_month();
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(Service& s) : service(s) {
    const auto send = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, service.health());
    });
    server.Get(R"(/v1/packages/(.+)/centrality)", [this, send](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> months;
      if (req.has_param("months")) months = req.get_param_value("months");
      send(res, service.get_package_status(req.matches[1].str(),
                                           months ? std::optional<std::string_view>(*months) : std::nullopt));
    });
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

UpdateScheduler::UpdateScheduler(Service& service, CronSchedule schedule, std::filesystem::path event_log,
                                 Clock clock)
    : service_(service), schedule_(std::move(schedule)), event_log_(std::move(event_log)), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
  }
}

UpdateScheduler::~UpdateScheduler() { stop(); }

UpdateSummary UpdateScheduler::tick() {
  std::ifstream in(event_log_);
  if (!in) throw std::runtime_error("cannot open event log " + event_log_.string());
  const auto events = ingest::read_event_log(in);
  const std::size_t known = service_.event_count();
  if (events.size() < known) throw std::runtime_error("event log shrank; refusing to update");
  return service_.run_update_cycle(std::span(events).subspan(known), clock_());
}

void UpdateScheduler::start() {
  stopping_ = false;
  worker_ = std::thread([this] {
    std::unique_lock lock(wait_mutex_);
    while (!stopping_) {
      const auto now = clock_();
      const auto next = schedule_.next_after(now);
      // The injected clock may not be the system clock; wait by duration.
      if (wake_.wait_for(lock, next - now, [this] { return stopping_; })) break;
      lock.unlock();
      try {
        const auto s = tick();
        std::cerr << "update cycle: " << s.months_advanced << " months, " << s.packages_ranked << " packages, "
                  << s.wall_seconds << " s\n";
      } catch (const std::exception& e) {
        std::cerr << "update cycle failed: " << e.what() << '\n';
      }
      lock.lock();
    }
  });
}

void UpdateScheduler::stop() {
  {
    std::lock_guard lock(wait_mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (worker_.joinable()) worker_.join();
}

}  // namespace decline::service
