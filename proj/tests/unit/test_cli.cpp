#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "decline/cli.hpp"
#include "decline/eval.hpp"
#include "decline/evaluation.hpp"
#include "decline/series_store.hpp"

namespace fs = std::filesystem;
using namespace decline;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = decline::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(DECLINE_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("full command chain on the fixture ecosystem") {
  TempDir dir("decline_cli_chain");
  auto r = invoke({"ingest", "--feed", fixture("feed.ndjson"), "--out", dir / "events.ndjson"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("433 packages") != std::string::npos);
  CHECK(r.err.find("2 skipped") != std::string::npos);

  r = invoke({"build", "--events", dir / "events.ndjson", "--store", dir / "store.bin", "--from", "2016-01", "--to",
           "2020-12"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("60 ranking columns") != std::string::npos);
  const auto store = centrality::SeriesStore::load(dir / "store.bin");
  CHECK(store.month_count() == 60);

  // Resuming past the last month is a no-op.
  r = invoke({"build", "--events", dir / "events.ndjson", "--store", dir / "store.bin", "--from", "2016-01", "--to",
           "2020-12"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("built 0 months") != std::string::npos);

  r = invoke({"detect", "--store", dir / "store.bin", "--as-of", "2019-06"});
  REQUIRE(r.code == 0);
  std::istringstream listing(r.out);
  std::string line;
  std::getline(listing, line);
  CHECK(line == "package\tstatus\tslope\tp_value");
  std::size_t rows = 0;
  bool left_trim_declining = false;
  while (std::getline(listing, line)) {
    ++rows;
    if (line.rfind("left-trim\tin_decline\t", 0) == 0) left_trim_declining = true;
  }
  CHECK(rows == store.package_count());
  CHECK(left_trim_declining);

  // Detection at S2 must reproduce the confusion arithmetic of the report.
  r = invoke({"evaluate", "--store", dir / "store.bin", "--npms-s1", fixture("npms_2018-12.csv"), "--npms-s2",
           fixture("npms_2019-04.csv"), "--npms-s3", fixture("npms_2019-06.csv"), "--deprecated",
           fixture("deprecated.csv"), "--survey", fixture("survey.csv"), "--metric",
           "stars=" + fixture("stars.csv"), "--metric", "forks=" + fixture("forks.csv"), "--out-dir", dir / "report"});
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(dir / "report/report.txt"));
  CHECK(r.out.find("True Positive (Tp)") != std::string::npos);
  CHECK(fs::exists(dir / "report/report.json"));

  r = invoke({"detect", "--store", dir / "store.bin", "--as-of", "2019-04", "--out", dir / "s2.tsv"});
  REQUIRE(r.code == 0);
  std::map<std::string, detector::Status> predictions;
  std::istringstream s2(slurp(dir / "s2.tsv"));
  std::getline(s2, line);
  while (std::getline(s2, line)) {
    const auto tab = line.find('\t');
    const auto tab2 = line.find('\t', tab + 1);
    predictions[line.substr(0, tab)] = detector::parse_status(line.substr(tab + 1, tab2 - tab - 1));
  }
  eval::NpmsSnapshots snaps;
  std::ifstream a(fixture("npms_2018-12.csv")), b(fixture("npms_2019-04.csv")), c(fixture("npms_2019-06.csv"));
  snaps.s1 = eval::read_npms_snapshot(a);
  snaps.s2 = eval::read_npms_snapshot(b);
  snaps.s3 = eval::read_npms_snapshot(c);
  const auto baseline = eval::build_npms_baseline(snaps);
  const auto counts = eval::confusion_metrics(baseline.labels, predictions);
  CHECK(r.err.empty());
  auto table = eval::format_classification_table(counts);
  table = table.substr(table.find("True Positive"));
  table = table.substr(0, table.find("ROC-AUC"));
  CHECK(slurp(dir / "report/report.txt").find(table) != std::string::npos);

  r = invoke({"export", "--store", dir / "store.bin", "--csv", dir / "store.csv"});
  REQUIRE(r.code == 0);
  r = invoke({"import", "--csv", dir / "store.csv", "--store", dir / "again/store.bin"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "store.bin") == slurp(dir / "again/store.bin"));
}

TEST_CASE("exit codes") {
  TempDir dir("decline_cli_codes");
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"build", "--events", "x"}).code == 2);
  CHECK(invoke({"detect", "--store", "x", "--as-of", "2019-13"}).code == 2);
  CHECK(invoke({"build", "--events", "x", "--store", "y", "--from", "2020-02", "--to", "2020-01"}).code == 2);
  CHECK(invoke({"evaluate", "--store", "x", "--npms-s1", "a"}).code == 2);

  const auto missing = invoke({"detect", "--store", dir / "none.bin", "--as-of", "2019-01"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error:") == 0);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "package,month,score,rank_neg\na,2020-01,x,-1\n";
  }
  CHECK(invoke({"import", "--csv", dir / "bad.csv", "--store", dir / "s.bin"}).code == 1);

  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("ingest") != std::string::npos);
}
