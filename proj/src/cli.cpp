#include "decline/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "decline/detector.hpp"
#include "decline/evaluation.hpp"
#include "decline/graph.hpp"
#include "decline/ingest.hpp"
#include "decline/pipeline.hpp"
#include "decline/series_store.hpp"
#include "decline/service.hpp"

namespace decline::cli {
namespace {

namespace fs = std::filesystem;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const CLI::Validator kMonth(
    [](std::string& value) {
      try {
        Month::parse(value);
        return std::string{};
      } catch (const std::invalid_argument& e) {
        return std::string(e.what());
      }
    },
    "YYYY-MM", "Month");

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<ingest::DependencyChangeEvent> load_events(const fs::path& path) {
  auto in = open_in(path);
  return ingest::read_event_log(in);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct DetectorOptions {
  int window = 6;
  double alpha = 0.001;
  double slope_threshold = 0.0;

  void add_to(CLI::App& app) {
    app.add_option("--window", window, "Trend window in months")->check(CLI::Range(3, 1200))->capture_default_str();
    app.add_option("--alpha", alpha, "Significance level for the slope test")->capture_default_str();
    app.add_option("--slope-threshold", slope_threshold, "A decline needs slope below this")->capture_default_str();
  }
  detector::DetectorConfig config() const { return {window, slope_threshold, alpha}; }
};

struct PageRankOptions {
  centrality::PageRankConfig config;

  void add_to(CLI::App& app) {
    app.add_option("--damping", config.damping, "PageRank damping factor")->capture_default_str();
    app.add_option("--tolerance", config.tolerance, "L1 convergence tolerance")->capture_default_str();
    app.add_option("--max-iterations", config.max_iterations, "PageRank iteration cap")->capture_default_str();
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detects packages in decline from dependency-graph centrality trends", "decline"};
  app.require_subcommand(1, 1);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Turn a registry feed into a dependency event log");
  std::string feed_path, events_out;
  ingest::DependencyScope scope;
  bool verbose = false;
  ingest_cmd->add_option("--feed", feed_path, "Newline-delimited registry documents")->required();
  ingest_cmd->add_option("--out", events_out, "Event log to write")->required();
  ingest_cmd->add_flag("--include-dev", scope.dev, "Count devDependencies as edges");
  ingest_cmd->add_flag("--include-peer", scope.peer, "Count peerDependencies as edges");
  ingest_cmd->add_flag("--include-optional", scope.optional, "Count optionalDependencies as edges");
  ingest_cmd->add_flag("-v,--verbose", verbose, "Print every diagnostic");

  // build
  auto* build_cmd = app.add_subcommand("build", "Rank packages month by month into a series store");
  std::string events_path, store_path, from_month, to_month, snapshots_dir;
  bool fresh = false;
  PageRankOptions pagerank_opts;
  build_cmd->add_option("--events", events_path, "Event log")->required();
  build_cmd->add_option("--store", store_path, "Series store to create or resume")->required();
  build_cmd->add_option("--from", from_month, "First month")->required()->check(kMonth);
  build_cmd->add_option("--to", to_month, "Last month")->required()->check(kMonth);
  build_cmd->add_option("--snapshots-dir", snapshots_dir, "Also write each monthly graph snapshot here");
  build_cmd->add_flag("--fresh", fresh, "Ignore an existing store instead of resuming it");
  pagerank_opts.add_to(*build_cmd);

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "Classify every package as of a month");
  std::string as_of, detect_out;
  DetectorOptions detect_opts;
  detect_cmd->add_option("--store", store_path, "Series store")->required();
  detect_cmd->add_option("--as-of", as_of, "Classification month")->required()->check(kMonth);
  detect_cmd->add_option("--out", detect_out, "Write the listing here instead of stdout");
  detect_opts.add_to(*detect_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score the detector against baseline datasets");
  std::string npms1, npms2, npms3, deprecated_path, survey_path, survey_month = "2019-11", out_dir;
  std::vector<std::string> metric_specs;
  DetectorOptions eval_opts;
  eval_cmd->add_option("--store", store_path, "Series store")->required();
  eval_cmd->add_option("--npms-s1", npms1, "npms scores at S1 (package,score)");
  eval_cmd->add_option("--npms-s2", npms2, "npms scores at S2");
  eval_cmd->add_option("--npms-s3", npms3, "npms scores at S3");
  eval_cmd->add_option("--deprecated", deprecated_path, "Deprecated packages (package,date,is_real_deprecation)");
  eval_cmd->add_option("--survey", survey_path, "Survey shares (package,awareness,usage,interest,satisfaction)");
  eval_cmd->add_option("--survey-month", survey_month, "Reference month for the survey labels")
      ->check(kMonth)
      ->capture_default_str();
  eval_cmd->add_option("--metric", metric_specs, "Metric history as NAME=PATH (dependents, downloads, stars, forks)");
  eval_cmd->add_option("--out-dir", out_dir, "Write report.json and report.txt here");
  eval_opts.add_to(*eval_cmd);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve package status over HTTP");
  std::string host = "127.0.0.1", schedule, start_month = "2010-01";
  int port = 8080;
  DetectorOptions serve_opts;
  PageRankOptions serve_pagerank;
  serve_cmd->add_option("--store", store_path, "Series store")->required()->envname("DECLINE_STORE");
  serve_cmd->add_option("--events", events_path, "Event log feeding update cycles")->envname("DECLINE_EVENTS");
  serve_cmd->add_option("--host", host, "Listen address")->capture_default_str()->envname("DECLINE_HOST");
  serve_cmd->add_option("--port", port, "Listen port")->capture_default_str()->envname("DECLINE_PORT");
  serve_cmd->add_option("--schedule", schedule, "Cron expression for update cycles, e.g. '0 3 1 * *'")
      ->envname("DECLINE_SCHEDULE");
  serve_cmd->add_option("--start", start_month, "First month when the store is empty")->check(kMonth);
  serve_opts.add_to(*serve_cmd);
  serve_pagerank.add_to(*serve_cmd);

  // export / import
  auto* export_cmd = app.add_subcommand("export", "Write a series store as CSV");
  std::string csv_path;
  export_cmd->add_option("--store", store_path, "Series store")->required();
  export_cmd->add_option("--csv", csv_path, "CSV output (stdout when omitted)");
  auto* import_cmd = app.add_subcommand("import", "Rebuild a series store from its CSV export");
  import_cmd->add_option("--csv", csv_path, "CSV input")->required();
  import_cmd->add_option("--store", store_path, "Series store to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (ingest_cmd->parsed()) {
      auto in = open_in(feed_path);
      ingest::FeedSummary summary;
      const auto events = ingest::ingest_feed(in, scope, summary);
      std::ostringstream buf;
      ingest::write_event_log(buf, events);
      write_file(events_out, buf.str());
      err << "ingested " << summary.packages << " packages (" << summary.releases << " releases kept, "
          << summary.skipped << " skipped, " << summary.malformed << " malformed), " << events.size() << " events\n";
      if (verbose) {
        for (const auto& d : summary.diagnostics) err << "  " << (d.package.empty() ? "-" : d.package) << ": " << d.message << '\n';
      } else if (!summary.diagnostics.empty()) {
        err << summary.diagnostics.size() << " diagnostics (use --verbose to list)\n";
      }
      return 0;
    }

    if (build_cmd->parsed()) {
      const Month from = Month::parse(from_month);
      const Month to = Month::parse(to_month);
      if (from > to) {
        err << "error: --from is after --to\n";
        return 2;
      }
      centrality::SeriesStore existing;
      if (!fresh && fs::exists(store_path)) existing = centrality::SeriesStore::load(store_path);
      if (existing.last_month() && existing.first_month() > from) {
        throw DataError("existing store starts at " + existing.first_month()->to_string() + ", after --from");
      }
      const std::size_t resumed = existing.month_count();
      centrality::MonthlyPipeline pipeline(pagerank_opts.config, std::move(existing));
      pipeline.append_events(load_events(events_path));
      centrality::MonthlyPipeline::SnapshotHook hook;
      if (!snapshots_dir.empty()) {
        hook = [&](const graph::GraphSnapshot& snap, const centrality::PageRankResult&) {
          graph::write_snapshot(snapshots_dir, snap);
        };
      }
      centrality::PipelineSummary summary;
      try {
        summary = pipeline.run(from, to, hook);
      } catch (...) {
        // Keep completed months so the next run resumes after them.
        pipeline.store().save(store_path);
        throw;
      }
      pipeline.store().save(store_path);
      err << "built " << summary.months_processed << " months (" << resumed << " already present), "
          << pipeline.store().month_count() << " ranking columns, " << pipeline.store().package_count()
          << " packages";
      if (summary.unconverged_months > 0) err << ", " << summary.unconverged_months << " months did not converge";
      err << '\n';
      return 0;
    }

    if (detect_cmd->parsed()) {
      const auto store = centrality::SeriesStore::load(store_path);
      const auto config = detect_opts.config();
      config.validate();
      const Month month = Month::parse(as_of);
      std::vector<std::uint32_t> order(store.package_count());
      for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return store.names()[a] < store.names()[b]; });
      std::ostringstream buf;
      buf << "package\tstatus\tslope\tp_value\n";
      for (const auto id : order) {
        const auto status = detector::classify(store.series(id), month, config);
        buf << store.names()[id] << '\t' << detector::to_string(status.status) << '\t'
            << (status.fit ? format_number(status.fit->slope) : "") << '\t'
            << (status.fit ? format_number(status.fit->p_value) : "") << '\n';
      }
      if (detect_out.empty()) {
        out << buf.str();
      } else {
        write_file(detect_out, buf.str());
      }
      return 0;
    }

    if (eval_cmd->parsed()) {
      const int npms_given = !npms1.empty() + !npms2.empty() + !npms3.empty();
      if (npms_given != 0 && npms_given != 3) {
        err << "error: --npms-s1, --npms-s2 and --npms-s3 go together\n";
        return 2;
      }
      const auto store = centrality::SeriesStore::load(store_path);
      eval::EvaluationInputs inputs;
      if (npms_given == 3) {
        eval::NpmsSnapshots snaps;
        auto in1 = open_in(npms1);
        auto in2 = open_in(npms2);
        auto in3 = open_in(npms3);
        snaps.s1 = eval::read_npms_snapshot(in1);
        snaps.s2 = eval::read_npms_snapshot(in2);
        snaps.s3 = eval::read_npms_snapshot(in3);
        inputs.npms = std::move(snaps);
      }
      if (!deprecated_path.empty()) {
        auto in = open_in(deprecated_path);
        inputs.deprecations = eval::read_deprecations(in);
      }
      if (!survey_path.empty()) {
        auto in = open_in(survey_path);
        inputs.survey = eval::read_survey(in);
        inputs.survey_month = Month::parse(survey_month);
      }
      for (const auto& spec : metric_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
          err << "error: --metric expects NAME=PATH, got '" << spec << "'\n";
          return 2;
        }
        eval::Metric metric;
        try {
          metric = eval::parse_metric(spec.substr(0, eq));
        } catch (const std::invalid_argument& e) {
          err << "error: " << e.what() << '\n';
          return 2;
        }
        auto in = open_in(spec.substr(eq + 1));
        inputs.metrics[metric] = eval::read_metric_history(in);
      }
      const auto config = eval_opts.config();
      const auto result = eval::evaluate(inputs, store, config);
      const auto text = eval::format_report(result);
      out << text;
      if (!out_dir.empty()) {
        write_file(fs::path(out_dir) / "report.txt", text);
        write_file(fs::path(out_dir) / "report.json", eval::report_json(result, config));
      }
      return 0;
    }

    if (serve_cmd->parsed()) {
      service::ServiceConfig config;
      config.detector = serve_opts.config();
      config.pagerank = serve_pagerank.config;
      config.start_month = Month::parse(start_month);
      config.store_path = store_path;
      service::Service svc(config);
      centrality::SeriesStore store;
      if (fs::exists(store_path)) store = centrality::SeriesStore::load(store_path);
      std::vector<ingest::DependencyChangeEvent> events;
      if (!events_path.empty() && fs::exists(events_path)) events = load_events(events_path);
      svc.load(std::move(store), std::move(events));

      std::unique_ptr<service::UpdateScheduler> scheduler;
      if (!schedule.empty()) {
        if (events_path.empty()) {
          err << "error: --schedule needs --events\n";
          return 2;
        }
        scheduler = std::make_unique<service::UpdateScheduler>(svc, service::CronSchedule::parse(schedule), events_path);
        scheduler->start();
      }
      service::HttpServer server(svc);
      err << "listening on " << host << ':' << port << '\n';
      if (!server.listen(host, port)) throw DataError("cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }

    if (export_cmd->parsed()) {
      const auto store = centrality::SeriesStore::load(store_path);
      std::ostringstream buf;
      store.write_csv(buf);
      if (csv_path.empty()) {
        out << buf.str();
      } else {
        write_file(csv_path, buf.str());
      }
      return 0;
    }

    if (import_cmd->parsed()) {
      auto in = open_in(csv_path);
      const auto store = centrality::SeriesStore::read_csv(in);
      if (fs::path(store_path).has_parent_path()) fs::create_directories(fs::path(store_path).parent_path());
      store.save(store_path);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace decline::cli
