#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "decline/centrality.hpp"
#include "decline/cli.hpp"
#include "decline/detector.hpp"
#include "decline/eval.hpp"
#include "decline/semver.hpp"

namespace py = pybind11;
using namespace decline;

namespace {

py::dict fit_dict(const detector::TrendFit& f) {
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["std_error"] = f.std_error;
  d["p_value"] = f.p_value;
  d["n_points"] = f.n_points;
  return d;
}

detector::DetectorConfig detector_config(int window, double alpha, double slope_threshold) {
  detector::DetectorConfig c;
  c.window_months = window;
  c.alpha = alpha;
  c.slope_threshold = slope_threshold;
  c.validate();
  return c;
}

std::vector<eval::BaselineLabel> to_labels(const std::map<std::string, bool>& labels) {
  std::vector<eval::BaselineLabel> out;
  for (const auto& [name, declining] : labels) {
    out.push_back({name, declining ? eval::Label::in_decline : eval::Label::not_in_decline, Month{2019, 4}});
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Centrality-trend decline detection";

  py::register_exception<UnparseableVersion>(m, "UnparseableVersion", PyExc_ValueError);

  m.def(
      "compare_semver",
      [](const std::string& a, const std::string& b) {
        const auto c = compare_semver(a, b);
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
      },
      py::arg("a"), py::arg("b"), "Semver precedence: -1, 0 or 1.");

  m.def(
      "pagerank",
      [](std::vector<std::string> names, const std::vector<std::pair<std::string, std::string>>& edges,
         double damping, double tolerance, int max_iterations) {
        std::map<std::string, graph::NodeId> ids;
        for (const auto& n : names) ids.emplace(n, static_cast<graph::NodeId>(ids.size()));
        if (ids.size() != names.size()) throw std::invalid_argument("duplicate package name");
        std::vector<graph::Edge> list;
        for (const auto& [a, b] : edges) {
          const auto ia = ids.find(a), ib = ids.find(b);
          if (ia == ids.end() || ib == ids.end()) throw std::invalid_argument("edge endpoint not in names");
          list.emplace_back(ia->second, ib->second);
        }
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        const auto table = std::make_shared<const graph::NameTable>(std::move(names));
        const auto snap = graph::GraphSnapshot::from_edges(Month{2020, 1}, table, std::move(list));
        centrality::PageRankConfig config;
        config.damping = damping;
        config.tolerance = tolerance;
        config.max_iterations = max_iterations;
        const auto r = centrality::pagerank(*snap, config);
        const auto ranks = centrality::rank_scores(r.scores, *table);
        py::dict scores, rank_map;
        for (std::size_t i = 0; i < table->size(); ++i) {
          scores[py::str((*table)[i])] = r.scores[i];
          rank_map[py::str((*table)[i])] = ranks[i];
        }
        py::dict out;
        out["scores"] = scores;
        out["ranks"] = rank_map;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        return out;
      },
      py::arg("names"), py::arg("edges"), py::arg("damping") = 0.85, py::arg("tolerance") = 1e-9,
      py::arg("max_iterations") = 200,
      "PageRank over dependent -> dependency edges. Returns scores, negated ranks and convergence info.");

  m.def(
      "rank_scores", [](const std::map<std::string, double>& scores) { return centrality::rank_scores(scores); },
      py::arg("scores"), "Negated ranks: descending score, ties by ascending name.");

  m.def(
      "fit_trend", [](const std::vector<double>& values) { return fit_dict(detector::fit_trend(values)); },
      py::arg("values"), "OLS slope with a two-sided t test at x = 0..k-1.");

  m.def(
      "classify",
      [](const std::vector<double>& values, const std::string& start, const std::string& as_of, int window,
         double alpha, double slope_threshold) {
        const Month first = Month::parse(start);
        detector::MetricSeries series;
        for (std::size_t i = 0; i < values.size(); ++i) series.push_back({first + static_cast<int>(i), values[i]});
        const auto s = detector::classify(series, Month::parse(as_of), detector_config(window, alpha, slope_threshold));
        py::dict out;
        out["status"] = std::string(detector::to_string(s.status));
        out["as_of"] = s.as_of.to_string();
        out["fit"] = s.fit ? py::object(fit_dict(*s.fit)) : py::object(py::none());
        return out;
      },
      py::arg("values"), py::arg("start"), py::arg("as_of"), py::arg("window") = 6, py::arg("alpha") = 0.001,
      py::arg("slope_threshold") = 0.0, "Classify a monthly series starting at `start` (YYYY-MM) as of `as_of`.");

  m.def(
      "roc_auc",
      [](const std::map<std::string, bool>& labels, const std::map<std::string, double>& scores) {
        return eval::roc_auc(to_labels(labels), scores);
      },
      py::arg("labels"), py::arg("scores"), "ROC-AUC; labels map package -> in decline.");

  m.def(
      "spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return eval::spearman(x, y); },
      py::arg("x"), py::arg("y"));

  m.def(
      "ndcg",
      [](const std::vector<std::string>& proposed, const std::vector<std::string>& truth) {
        return eval::ndcg(proposed, truth);
      },
      py::arg("proposed"), py::arg("ground_truth"));

  m.def(
      "metrics_from_counts",
      [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
        const auto r = eval::metrics_from_counts(tp, fp, fn, tn);
        py::dict d;
        d["precision"] = r.precision_defined ? py::object(py::float_(r.precision)) : py::object(py::none());
        d["recall"] = r.recall_defined ? py::object(py::float_(r.recall)) : py::object(py::none());
        d["f1"] = r.f1_defined ? py::object(py::float_(r.f1)) : py::object(py::none());
        return d;
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

  m.def(
      "build_npms_baseline",
      [](const std::map<std::string, double>& s1, const std::map<std::string, double>& s2,
         const std::map<std::string, double>& s3) {
        eval::NpmsSnapshots snaps;
        snaps.s1 = s1;
        snaps.s2 = s2;
        snaps.s3 = s3;
        std::map<std::string, std::string> out;
        for (const auto& l : eval::build_npms_baseline(snaps).labels) out[l.package] = std::string(eval::to_string(l.label));
        return out;
      },
      py::arg("s1"), py::arg("s2"), py::arg("s3"), "Label packages from three npms score snapshots.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = decline::cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the decline command line; returns (exit code, stdout, stderr).");
}
