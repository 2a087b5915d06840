#include <fstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "langtraj/pipeline.hpp"
#include "langtraj/synth.hpp"

namespace py = pybind11;
using namespace langtraj;

PYBIND11_MODULE(_core, m) {
  m.doc() = "langtraj core: language features, trajectory slopes and association statistics";
  m.attr("__version__") = std::string(kPipelineVersion);

  py::register_exception<Error>(m, "Error");

  m.def("tokenize", &tokenize, py::arg("text"));

  m.def(
      "extract_ngrams",
      [](const std::vector<std::string>& tokens, int max_order, bool binary) {
        const auto fv = extract_ngrams(std::span<const Token>(tokens), max_order,
                                       binary ? FeatureMode::binary : FeatureMode::relative_frequency);
        py::dict out;
        for (const auto& [key, value] : fv.entries()) out[py::str(key.text)] = value;
        return out;
      },
      py::arg("tokens"), py::arg("max_order") = kMaxNGramOrder, py::arg("binary") = false,
      "n-gram values keyed by the space-joined n-gram.");

  m.def(
      "meta_features",
      [](const std::vector<std::string>& tokens) {
        const auto mf = meta_features(std::span<const Token>(tokens));
        return py::make_tuple(mf.word_count, mf.avg_word_length);
      },
      py::arg("tokens"), "(word_count, avg_word_length)");

  m.def(
      "standardize", [](const std::vector<double>& v) { return standardize(v); }, py::arg("values"));
  m.def(
      "bh_adjust", [](const std::vector<double>& p) { return bh_adjust(p); }, py::arg("p_values"));

  m.def(
      "pearson_r",
      [](const std::vector<double>& x, const std::vector<double>& y, double level) {
        const auto c = pearson_r(x, y, level);
        return py::make_tuple(c.r, py::make_tuple(c.ci.lo, c.ci.hi), c.p_value);
      },
      py::arg("x"), py::arg("y"), py::arg("level") = 0.95, "(r, (lo, hi), p)");

  m.def(
      "fisher_ci",
      [](double r, std::size_t n, double level) {
        const auto ci = fisher_ci(r, n, level);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("r"), py::arg("n"), py::arg("level") = 0.95);

  m.def(
      "fit_subject_trajectory",
      [](const std::vector<std::pair<double, double>>& points) {
        std::vector<TimedScore> pts;
        for (const auto& [t, pcl] : points) pts.push_back({t, pcl});
        const auto fit = fit_subject_trajectory(pts);
        return py::make_tuple(fit.intercept, fit.slope, fit.rss);
      },
      py::arg("points"), "(intercept, slope, rss) from (t, pcl) pairs.");

  m.def(
      "format_estimate",
      [](double value, double lo, double hi, bool significant) {
        return format_estimate({value, {lo, hi}, 1.0, 1.0, significant});
      },
      py::arg("value"), py::arg("lo"), py::arg("hi"), py::arg("significant"));

  m.def(
      "simulate",
      [](const std::string& config_json, const std::filesystem::path& out, unsigned jobs) {
        const auto config = SynthConfig::from_json(nlohmann::json::parse(config_json));
        const auto cohort = generate_cohort(config, jobs);
        write_cohort(out, cohort, config);
        RunConfig run;
        run.transcripts = "transcripts.jsonl";
        run.pcl = "pcl.csv";
        run.demographics = "demographics.csv";
        run.bundle = "bundle";
        run.seed = config.seed;
        std::ofstream(out / "run.json") << run.to_json().dump(2) << '\n';
        return cohort.truth.clip_rate();
      },
      py::arg("config_json"), py::arg("out"), py::arg("jobs") = 1,
      "Writes a synthetic cohort plus a run.json to `out`; returns the PCL clip rate.");

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config_path) {
        const auto summary = run_pipeline(load_run_config(config_path));
        return summary.artifacts;
      },
      py::arg("config_path"), "Runs every stage; returns the artifact names.");
}
