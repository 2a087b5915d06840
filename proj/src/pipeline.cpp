#include "langtraj/pipeline.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "langtraj/csv.hpp"
#include "langtraj/digest.hpp"

namespace langtraj {

namespace {

namespace fs = std::filesystem;

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

fs::path resolve(const nlohmann::json& j, std::string_view key, const fs::path& base) {
  fs::path p = j.at(std::string(key)).get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

Manifest with(Manifest m, std::initializer_list<std::pair<std::string, std::string>> extra) {
  m.insert(m.end(), extra.begin(), extra.end());
  return m;
}

/// Collects artifact names while writing into the output directory.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    fs::create_directories(path.parent_path());
    write_text(path, content);
    names_.push_back(name);
  }
  template <typename Fn>
  void stream(const std::string& name, Fn&& fn) {
    std::ostringstream out;
    fn(out);
    text(name, out.str());
  }
  void add(const std::string& name) { names_.push_back(name); }

  std::vector<std::string> names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(fmt::format("alpha must lie in (0, 1), got {}", alpha));
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  for (const auto& [name, path] : {std::pair<std::string_view, const fs::path&>{"transcripts", transcripts},
                                   {"pcl", pcl},
                                   {"demographics", demographics},
                                   {"bundle", bundle}}) {
    if (path.empty()) throw ConfigError("input path '" + std::string(name) + "' is not set");
    if (!fs::exists(path)) throw ConfigError("input '" + std::string(name) + "' does not exist: " + path.string());
  }
  if (!fs::is_directory(bundle)) throw ConfigError("bundle must be a directory: " + bundle.string());
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
      if (key == "inputs") {
        for (const auto& [name, _] : v.items()) {
          if (name == "transcripts") c.transcripts = resolve(v, name, base_dir);
          else if (name == "pcl") c.pcl = resolve(v, name, base_dir);
          else if (name == "demographics") c.demographics = resolve(v, name, base_dir);
          else if (name == "bundle") c.bundle = resolve(v, name, base_dir);
          else throw ConfigError("unknown input '" + name + "'");
        }
      } else if (key == "analyses") {
        for (const auto& [name, flag] : v.items()) {
          const bool on = flag.get<bool>();
          if (name == "concurrent") c.analyses.concurrent = on;
          else if (name == "trajectory") c.analyses.trajectory = on;
          else if (name == "suppression") c.analyses.suppression = on;
          else if (name == "mediation") c.analyses.mediation = on;
          else if (name == "joint") c.analyses.joint = on;
          else if (name == "tertiles") c.analyses.tertiles = on;
          else throw ConfigError("unknown analysis '" + name + "'");
        }
      } else if (key == "alpha") {
        c.alpha = v.get<double>();
      } else if (key == "out") {
        c.out = resolve(j, key, base_dir);
      } else if (key == "seed") {
        if (!v.is_null()) c.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        c.jobs = v.get<unsigned>();
      } else {
        throw ConfigError("unknown run config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["inputs"] = {{"transcripts", transcripts.generic_string()},
                 {"pcl", pcl.generic_string()},
                 {"demographics", demographics.generic_string()},
                 {"bundle", bundle.generic_string()}};
  j["analyses"] = {{"concurrent", analyses.concurrent}, {"trajectory", analyses.trajectory},
                   {"suppression", analyses.suppression}, {"mediation", analyses.mediation},
                   {"joint", analyses.joint},             {"tertiles", analyses.tertiles}};
  j["alpha"] = alpha;
  j["out"] = out.generic_string();
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
  j["jobs"] = jobs;
  return j;
}

RunConfig load_run_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j, path.parent_path());
}

CohortInputs ingest(const RunConfig& config) {
  CohortInputs c;
  {
    auto in = open_input(config.transcripts);
    c.transcripts = parse_transcripts(in, config.transcripts.filename().string());
  }
  {
    auto in = open_input(config.pcl);
    c.pcl = parse_pcl_records(in, config.pcl.filename().string());
  }
  {
    auto in = open_input(config.demographics);
    c.demographics = parse_demographics(in, config.demographics.filename().string());
  }
  resolve_years_since_911(c.demographics, c.transcripts);
  c.sample = apply_inclusion_criteria(c.transcripts, c.pcl, c.demographics);
  spdlog::info("ingest: {} transcripts, {} concurrent-eligible, {} trajectory-eligible", c.transcripts.size(),
               c.sample.concurrent_count(), c.sample.trajectory_count());
  return c;
}

void write_sample_table(std::ostream& out, const AnalysisSample& sample) {
  csv::write_row(out, {"responder_id", "baseline_date", "baseline_pcl", "pre_count", "post_count",
                       "eligible_concurrent", "eligible_trajectory"});
  for (const auto& e : sample.entries) {
    csv::write_row(out, {e.responder_id, e.baseline_pcl ? format_iso_date(e.baseline_pcl->date) : "",
                         e.baseline_pcl ? csv::format_double(e.baseline_pcl->score) : "",
                         std::to_string(e.pre_interview_count), std::to_string(e.post_interview_count),
                         e.eligible_concurrent ? "1" : "0", e.eligible_trajectory ? "1" : "0"});
  }
}

AnalysisOutputs compute_analyses(const AnalysisInputs& in, const RunConfig& config) {
  AnalysisOptions options;
  options.alpha = config.alpha;
  const auto features = assessment_features();
  AnalysisOutputs out;
  const auto& a = config.analyses;

  if (a.concurrent || a.mediation) {
    const auto frame = build_analysis_frame(in.assessments, in.cohort.sample, in.cohort.demographics,
                                            in.trajectories, Eligibility::concurrent);
    const auto covs = concurrent_covariates();
    if (a.concurrent) out.concurrent = concurrent_associations(frame, options);
    if (a.mediation) {
      out.mediation_concurrent = mediation_table(frame, features, kInterviewPclColumn, covs, options);
    }
  }
  if (a.trajectory || a.suppression || a.mediation || a.joint) {
    const auto frame = build_analysis_frame(in.assessments, in.cohort.sample, in.cohort.demographics,
                                            in.trajectories, Eligibility::trajectory);
    const auto covs = trajectory_covariates();
    if (a.trajectory) out.trajectory = trajectory_associations(frame, options);
    if (a.suppression) out.suppression = suppression_table(frame, features, kSlopeColumn, covs, options);
    if (a.mediation) out.mediation_trajectory = mediation_table(frame, features, kSlopeColumn, covs, options);
    if (a.joint) out.joint = joint_model_table(in.panel, frame, features, covs, options);
  }
  if (a.tertiles) {
    ScoreMap baseline;
    for (const auto& e : in.cohort.sample.entries) {
      if (e.eligible_trajectory && e.baseline_pcl) baseline[e.responder_id] = e.baseline_pcl->score;
    }
    for (std::size_t k = 0; k < kAssessmentCount; ++k) {
      ScoreMap scores;
      for (const auto& r : in.assessments.records) {
        if (baseline.contains(r.responder_id)) scores[r.responder_id] = r.scores[k];
      }
      out.tertiles.push_back(tertile_trajectories(kAssessmentNames[k], scores, in.panel, baseline));
    }
  }
  return out;
}

std::vector<std::string> write_analyses(const AnalysisOutputs& o, const Manifest& manifest, const fs::path& dir) {
  ArtifactWriter w(dir);
  if (!o.concurrent.empty()) {
    w.stream("concurrent_results.csv", [&](std::ostream& out) {
      write_association_results(out, o.concurrent,
                                with(manifest, {{"analysis", "concurrent"}, {"outcome", "interview_pcl"}}));
    });
    w.text("concurrent_table.md",
           render_association_table(o.concurrent, "Concurrent associations with interview PCL").to_markdown());
  }
  if (!o.trajectory.empty()) {
    w.stream("trajectory_results.csv", [&](std::ostream& out) {
      write_association_results(out, o.trajectory, with(manifest, {{"analysis", "trajectory"}, {"outcome", "slope"}}));
    });
    w.text("trajectory_table.md",
           render_association_table(o.trajectory, "Associations with post-interview PCL slope").to_markdown());
  }
  if (!o.suppression.empty()) {
    w.stream("suppression_results.csv", [&](std::ostream& out) {
      write_suppression_results(out, o.suppression, with(manifest, {{"analysis", "suppression"}, {"outcome", "slope"}}));
    });
    w.text("suppression_table.md",
           render_suppression_table(o.suppression, "Slope associations, one covariate at a time").to_markdown());
  }
  if (!o.mediation_concurrent.empty()) {
    w.stream("mediation_concurrent.csv", [&](std::ostream& out) {
      write_mediation_results(out, o.mediation_concurrent,
                              with(manifest, {{"analysis", "mediation"}, {"outcome", "interview_pcl"}}));
    });
    w.text("mediation_concurrent.md",
           render_mediation_table(o.mediation_concurrent, "Interview PCL, with and without marital status")
               .to_markdown());
  }
  if (!o.mediation_trajectory.empty()) {
    w.stream("mediation_trajectory.csv", [&](std::ostream& out) {
      write_mediation_results(out, o.mediation_trajectory,
                              with(manifest, {{"analysis", "mediation"}, {"outcome", "slope"}}));
    });
    w.text("mediation_trajectory.md",
           render_mediation_table(o.mediation_trajectory, "PCL slope, with and without marital status")
               .to_markdown());
  }
  if (!o.joint.empty()) {
    w.stream("joint_model.csv", [&](std::ostream& out) {
      write_joint_results(out, o.joint, with(manifest, {{"analysis", "joint"}, {"outcome", "pcl"}}));
    });
    w.text("joint_model.md", render_joint_table(o.joint, "Pooled panel model, language x time").to_markdown());
  }
  if (!o.tertiles.empty()) {
    w.stream("tertiles.csv", [&](std::ostream& out) { write_tertile_data(out, o.tertiles); });
    fs::create_directories(dir / "plots");
    for (const auto& pair : o.tertiles) {
      const std::string stem = "plots/" + pair.top.feature_name;
      emit_tertile_plot(pair, dir / stem);
      w.add(stem + ".csv");
      w.add(stem + ".svg");
    }
  }
  return w.names();
}

Manifest results_manifest(const RunConfig& config, std::string_view bundle_id) {
  Manifest m{{"pipeline_version", std::string(kPipelineVersion)},
             {"bundle_id", std::string(bundle_id)},
             {"alpha", csv::format_double(config.alpha)}};
  if (config.seed) m.emplace_back("seed", std::to_string(*config.seed));
  return m;
}

RunSummary run_pipeline(const RunConfig& config) {
  config.validate();
  fs::create_directories(config.out);

  nlohmann::ordered_json manifest;
  manifest["pipeline_version"] = std::string(kPipelineVersion);
  manifest["seed"] = config.seed ? nlohmann::ordered_json(*config.seed) : nlohmann::ordered_json(nullptr);
  manifest["alpha"] = config.alpha;
  manifest["analyses"] = config.to_json()["analyses"];
  auto inputs = nlohmann::ordered_json::object();
  for (const auto& [name, path] : {std::pair<std::string, const fs::path&>{"transcripts", config.transcripts},
                                   {"pcl", config.pcl},
                                   {"demographics", config.demographics}}) {
    inputs[name] = {{"file", path.filename().string()}, {"sha256", sha256_file(path)}};
  }
  auto bundle_files = nlohmann::ordered_json::object();
  {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(config.bundle)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) bundle_files[fs::relative(f, config.bundle).generic_string()] = sha256_file(f);
  }
  inputs["bundle"] = {{"files", bundle_files}};
  manifest["inputs"] = inputs;

  auto stages = nlohmann::ordered_json::array();
  std::vector<std::string> artifacts;
  ArtifactWriter w(config.out);
  std::string stage;
  auto done = [&](const std::string& name) { stages.push_back({{"name", name}, {"status", "ok"}}); };

  auto finish = [&](const std::string& status, const std::string& error) {
    static const std::array<std::string_view, 5> kStages = {"ingest", "assess", "trajectory", "inference", "report"};
    const std::size_t first = stages.size();
    for (std::size_t k = first; k < kStages.size(); ++k) {
      nlohmann::ordered_json entry{{"name", kStages[k]}, {"status", k == first ? "failed" : "skipped"}};
      if (k == first) entry["error"] = error;
      stages.push_back(std::move(entry));
    }
    manifest["stages"] = stages;
    manifest["status"] = status;
    manifest["partial"] = status != "ok";
    auto digests = nlohmann::ordered_json::object();
    for (const auto& name : artifacts) digests[name] = sha256_file(config.out / name);
    manifest["artifacts"] = digests;
    write_text(config.out / "manifest.json", manifest.dump(2) + "\n");
  };

  try {
    stage = "ingest";
    const auto cohort = ingest(config);
    w.stream("sample.csv", [&](std::ostream& out) { write_sample_table(out, cohort.sample); });
    artifacts = w.names();
    done(stage);

    stage = "assess";
    const auto bundle = load_bundle(config.bundle);
    manifest["bundle_id"] = bundle.id;
    manifest["inputs"]["bundle"]["id"] = bundle.id;
    const auto assessments = assess_cohort(cohort.transcripts, bundle, config.jobs);
    for (const auto& x : assessments.exclusions) spdlog::warn("excluded {}: {}", x.responder_id, x.reason);
    w.stream("assessments.csv", [&](std::ostream& out) { write_assessment_table(out, assessments); });
    artifacts = w.names();
    done(stage);

    stage = "trajectory";
    const auto panel = build_panel(cohort.transcripts, cohort.pcl, cohort.sample);
    const auto fits = fit_cohort_trajectories(panel, cohort.sample);
    w.stream("trajectories.csv", [&](std::ostream& out) { write_trajectory_table(out, fits); });
    artifacts = w.names();
    done(stage);

    manifest["sample"] = {{"transcripts", cohort.transcripts.size()},
                          {"assessed", assessments.records.size()},
                          {"excluded", assessments.exclusions.size()},
                          {"concurrent_eligible", cohort.sample.concurrent_count()},
                          {"trajectory_eligible", cohort.sample.trajectory_count()}};

    stage = "inference";
    const auto outputs = compute_analyses({cohort, assessments, panel, fits}, config);
    done(stage);

    stage = "report";
    for (auto& name : write_analyses(outputs, results_manifest(config, bundle.id), config.out)) {
      artifacts.push_back(std::move(name));
    }
    done(stage);
  } catch (const std::exception& e) {
    spdlog::error("[{}] {}", stage, e.what());
    // Whatever reached the disk before the failure is listed, flagged partial.
    finish("failed", e.what());
    throw StageError(stage, e.what());
  }
  finish("ok", "");
  return {config.out, artifacts};
}

}  // namespace langtraj
