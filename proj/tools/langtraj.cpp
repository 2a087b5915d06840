// langtraj: command-line entry point for every pipeline stage.
//
// Log level comes from LANGTRAJ_LOG_LEVEL (trace, debug, info, warn, error,
// off); default is warn so that stdout/stderr stay quiet on success.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "langtraj/pipeline.hpp"
#include "langtraj/synth.hpp"

namespace fs = std::filesystem;
using namespace langtraj;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::ifstream open(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Flags shared by the stage subcommands. A --config file supplies defaults;
// individual flags override it.
struct Common {
  std::string config;
  std::string transcripts, pcl, demographics, bundle, out;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;

  void add_inputs(CLI::App* app) {
    app->add_option("--config", config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    app->add_option("--transcripts", transcripts, "Transcripts (JSON lines)");
    app->add_option("--pcl", pcl, "PCL records (CSV)");
    app->add_option("--demographics", demographics, "Demographics (CSV)");
  }
  void add_bundle(CLI::App* app) { app->add_option("--bundle", bundle, "Model bundle directory"); }
  void add_run(CLI::App* app) {
    app->add_option("--alpha", alpha, "FDR level")->check(CLI::Range(0.0, 1.0));
    app->add_option("--seed", seed, "Seed recorded in the manifest");
    app->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (!transcripts.empty()) c.transcripts = transcripts;
    if (!pcl.empty()) c.pcl = pcl;
    if (!demographics.empty()) c.demographics = demographics;
    if (!bundle.empty()) c.bundle = bundle;
    if (!out.empty()) c.out = out;
    if (alpha) c.alpha = *alpha;
    if (seed) c.seed = *seed;
    if (jobs) c.jobs = *jobs;
    return c;
  }
};

void require_inputs(const RunConfig& c, bool bundle) {
  for (const auto& [name, path] : {std::pair<std::string, const fs::path&>{"transcripts", c.transcripts},
                                   {"pcl", c.pcl},
                                   {"demographics", c.demographics}}) {
    if (path.empty()) throw ConfigError("--" + name + " (or --config) is required");
  }
  if (bundle && c.bundle.empty()) throw ConfigError("--bundle (or --config) is required");
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("langtraj");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("LANGTRAJ_LOG_LEVEL")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string_view(level) != "off") {
      spdlog::warn("unknown LANGTRAJ_LOG_LEVEL '{}', using warn", level);
    } else {
      spdlog::set_level(parsed);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Language-based assessments and PCL trajectory analysis"};
  app.set_version_flag("--version", std::string(kPipelineVersion));
  app.require_subcommand(1);

  Common common;

  auto* ingest_cmd = app.add_subcommand("ingest", "Apply inclusion criteria; write the analysis sample table");
  common.add_inputs(ingest_cmd);
  ingest_cmd->add_option("--out", common.out, "Sample table (CSV)")->required();

  auto* assess_cmd = app.add_subcommand("assess", "Score transcripts with the nine assessments");
  assess_cmd->add_option("--config", common.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  assess_cmd->add_option("--transcripts", common.transcripts, "Transcripts (JSON lines)");
  common.add_bundle(assess_cmd);
  assess_cmd->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  assess_cmd->add_option("--out", common.out, "Assessment table (CSV)")->required();

  auto* traj_cmd = app.add_subcommand("trajectory", "Fit per-responder PCL slopes");
  common.add_inputs(traj_cmd);
  traj_cmd->add_option("--out", common.out, "Trajectory table (CSV)")->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "Run the association analyses and write result tables");
  common.add_inputs(analyze_cmd);
  common.add_bundle(analyze_cmd);
  common.add_run(analyze_cmd);
  std::string assessments_path;
  analyze_cmd->add_option("--assessments", assessments_path, "Precomputed assessment table (skips scoring)")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", common.out, "Output directory");

  auto* report_cmd = app.add_subcommand("report", "Render a results table or tertile plot");
  std::string results_path, format = "table", report_out, feature;
  report_cmd->add_option("--results", results_path, "Association results CSV, or tertile data CSV for plots")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--format", format, "table or plot")->check(CLI::IsMember({"table", "plot"}));
  report_cmd->add_option("--feature", feature, "Feature to plot (default: all, one SVG each)");
  report_cmd->add_option("--out", report_out, "Output file (directory when plotting several features)")
      ->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic cohort with planted effects");
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  unsigned sim_jobs = 1;
  sim_cmd->add_option("--config", sim_config, "Generator configuration (JSON); defaults if omitted")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();
  sim_cmd->add_option("--seed", sim_seed, "Override the configured seed");
  sim_cmd->add_option("--jobs", sim_jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "End-to-end: ingest, assess, trajectory, inference, report");
  common.add_inputs(run_cmd);
  common.add_bundle(run_cmd);
  common.add_run(run_cmd);
  run_cmd->add_option("--out", common.out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) {
      const auto c = common.resolve();
      require_inputs(c, false);
      const auto cohort = ingest(c);
      std::ostringstream out;
      write_sample_table(out, cohort.sample);
      write_file(common.out, out.str());
    } else if (assess_cmd->parsed()) {
      const auto c = common.resolve();
      if (c.transcripts.empty() || c.bundle.empty()) throw ConfigError("--transcripts and --bundle are required");
      auto in = open(c.transcripts);
      const auto transcripts = parse_transcripts(in, c.transcripts.filename().string());
      const auto bundle = load_bundle(c.bundle);
      const auto table = assess_cohort(transcripts, bundle, c.jobs);
      for (const auto& x : table.exclusions) spdlog::warn("excluded {}: {}", x.responder_id, x.reason);
      std::ostringstream out;
      write_assessment_table(out, table);
      write_file(common.out, out.str());
    } else if (traj_cmd->parsed()) {
      const auto c = common.resolve();
      require_inputs(c, false);
      const auto cohort = ingest(c);
      const auto panel = build_panel(cohort.transcripts, cohort.pcl, cohort.sample);
      std::ostringstream out;
      write_trajectory_table(out, fit_cohort_trajectories(panel, cohort.sample));
      write_file(common.out, out.str());
    } else if (analyze_cmd->parsed()) {
      const auto c = common.resolve();
      require_inputs(c, assessments_path.empty());
      if (!(c.alpha > 0 && c.alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
      const auto cohort = ingest(c);
      AssessmentTable table;
      if (!assessments_path.empty()) {
        auto in = open(assessments_path);
        table = read_assessment_table(in, fs::path(assessments_path).filename().string());
      } else {
        table = assess_cohort(cohort.transcripts, load_bundle(c.bundle), c.jobs);
      }
      const auto panel = build_panel(cohort.transcripts, cohort.pcl, cohort.sample);
      const auto fits = fit_cohort_trajectories(panel, cohort.sample);
      const auto outputs = compute_analyses({cohort, table, panel, fits}, c);
      fs::create_directories(c.out);
      for (const auto& name : write_analyses(outputs, results_manifest(c, table.bundle_id), c.out)) {
        std::cout << (c.out / name).string() << '\n';
      }
    } else if (report_cmd->parsed()) {
      auto in = open(results_path);
      if (format == "table") {
        const auto results = read_association_results(in, fs::path(results_path).filename().string());
        std::string title = "Associations";
        for (const auto& [k, v] : results.manifest) {
          if (k == "outcome") title = "Associations with " + v;
        }
        const auto table = render_association_table(results.results, title);
        write_file(report_out, fs::path(report_out).extension() == ".tsv" ? table.to_tsv() : table.to_markdown());
      } else {
        const auto pairs = read_tertile_data(in, fs::path(results_path).filename().string());
        if (pairs.empty()) throw Error(results_path + " holds no tertile series");
        if (!feature.empty() || pairs.size() == 1) {
          auto it = std::find_if(pairs.begin(), pairs.end(), [&](const TertilePair& p) {
            return feature.empty() || p.top.feature_name == feature;
          });
          if (it == pairs.end()) throw Error("no tertile series for feature '" + feature + "'");
          write_file(report_out, tertile_svg(*it));
        } else {
          fs::create_directories(report_out);
          for (const auto& p : pairs) write_file(fs::path(report_out) / (p.top.feature_name + ".svg"), tertile_svg(p));
        }
      }
    } else if (sim_cmd->parsed()) {
      SynthConfig config = sim_config.empty() ? SynthConfig{} : load_synth_config(sim_config);
      if (sim_seed) config.seed = *sim_seed;
      const auto cohort = generate_cohort(config, sim_jobs);
      write_cohort(sim_out, cohort, config);
      // A ready-to-use run configuration next to the generated files.
      RunConfig run;
      run.transcripts = "transcripts.jsonl";
      run.pcl = "pcl.csv";
      run.demographics = "demographics.csv";
      run.bundle = "bundle";
      run.out = "results";
      run.seed = config.seed;
      write_file(fs::path(sim_out) / "run.json", run.to_json().dump(2) + "\n");
      if (cohort.truth.clip_rate() > 0.01) {
        spdlog::warn("{:.2f}% of post-interview PCL values were clipped to [17, 85]", 100 * cohort.truth.clip_rate());
      }
    } else if (run_cmd->parsed()) {
      const auto summary = run_pipeline(common.resolve());
      std::cout << (summary.out / "manifest.json").string() << '\n';
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: [config] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
