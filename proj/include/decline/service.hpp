#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "decline/centrality.hpp"
#include "decline/detector.hpp"
#include "decline/ingest.hpp"
#include "decline/pipeline.hpp"
#include "decline/series_store.hpp"

namespace decline::service {

/// A complete monthly store plus the decline status of every package as of
/// the store's last month. Never mutated after construction.
class ServedStore {
 public:
  ServedStore(centrality::SeriesStore store, const detector::DetectorConfig& config);

  const centrality::SeriesStore& store() const { return store_; }
  std::optional<Month> computed_at() const { return store_.last_month(); }
  const detector::DeclineStatus& status(std::uint32_t id) const { return statuses_[id]; }

 private:
  centrality::SeriesStore store_;
  std::vector<detector::DeclineStatus> statuses_;
};

struct PackageStatusView {
  std::string package;
  std::vector<std::pair<Month, std::int32_t>> series;  // trailing window, oldest first
  std::vector<Month> gaps;  // months inside the window with no data
  detector::DeclineStatus decline;
  Month computed_at;
};

std::string to_json(const PackageStatusView& view);

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct UpdateSummary {
  int months_advanced = 0;
  std::size_t packages_ranked = 0;
  double wall_seconds = 0.0;
  std::optional<Month> computed_at;
};

/// Five-field cron subset ("minute hour day-of-month month day-of-week"),
/// each field '*' or a comma list of integers, evaluated in UTC.
class CronSchedule {
 public:
  static CronSchedule parse(std::string_view expression);
  /// First matching minute strictly after `after`.
  Timestamp next_after(Timestamp after) const;

 private:
  std::vector<int> fields_[5];  // empty = any
  bool matches(Timestamp minute) const;
};

struct ServiceConfig {
  detector::DetectorConfig detector;
  centrality::PageRankConfig pagerank;
  Month start_month{2010, 1};  // used when the store is still empty
  int default_months = 12;
  std::optional<std::filesystem::path> store_path;  // persisted after each swap
};

/// Read-only status API over an atomically swapped store, plus the single
/// updater that advances it month by month.
class Service {
 public:
  explicit Service(ServiceConfig config);

  /// Installs a store and the event log it was built from.
  void load(centrality::SeriesStore store, std::vector<ingest::DependencyChangeEvent> events);

  std::shared_ptr<const ServedStore> current() const;

  std::optional<PackageStatusView> package_status(std::string_view name, int months) const;

  /// GET /v1/packages/{name}/centrality?months=N
  Response get_package_status(std::string_view name, std::optional<std::string_view> months_param) const;
  /// GET /v1/health
  Response health() const;

  /// Appends `delta` to the event log and processes every month that has
  /// completed before `now`, swapping in the new store once at the end. On
  /// error the previous store stays live and the delta is discarded.
  UpdateSummary run_update_cycle(std::span<const ingest::DependencyChangeEvent> delta, Timestamp now);

  std::size_t event_count() const;

 private:
  ServiceConfig config_;
  mutable std::mutex swap_mutex_;  // guards current_ only for pointer copies
  std::shared_ptr<const ServedStore> current_;

  mutable std::mutex update_mutex_;
  std::unique_ptr<centrality::MonthlyPipeline> pipeline_;
};

/// HTTP front end. Listens on its own thread until stop() or destruction.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and starts serving; port 0 picks a free port. Returns the port.
  int start(const std::string& host, int port);
  void stop();
  /// Blocks serving on the calling thread.
  bool listen(const std::string& host, int port);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Re-reads an append-only event log file on a cron schedule and feeds new
/// records to the service.
class UpdateScheduler {
 public:
  using Clock = std::function<Timestamp()>;

  UpdateScheduler(Service& service, CronSchedule schedule, std::filesystem::path event_log, Clock clock = {});
  ~UpdateScheduler();
  UpdateScheduler(const UpdateScheduler&) = delete;
  UpdateScheduler& operator=(const UpdateScheduler&) = delete;

  /// Runs one cycle immediately.
  UpdateSummary tick();
  void start();
  void stop();

 private:
  Service& service_;
  CronSchedule schedule_;
  std::filesystem::path event_log_;
  Clock clock_;
  std::thread worker_;
  std::mutex wait_mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
};

}  // namespace decline::service
