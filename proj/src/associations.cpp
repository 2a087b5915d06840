#include "langtraj/associations.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "langtraj/errors.hpp"
#include "langtraj/numeric.hpp"
#include "langtraj/ols.hpp"

namespace langtraj {

namespace {

std::vector<std::string> concat(std::initializer_list<std::string_view> head, std::span<const std::string> tail) {
  std::vector<std::string> out;
  for (auto h : head) out.emplace_back(h);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

Estimate from_correlation(const Correlation& c) {
  Estimate e;
  e.value = c.r;
  e.ci = c.ci;
  e.p_raw = e.p_adj = c.p_value;
  return e;
}

Estimate from_fit(const OlsFit& fit, std::size_t j, double level) {
  Estimate e;
  e.value = fit.coefficients[static_cast<Eigen::Index>(j)];
  e.ci = fit.ci(j, level);
  e.p_raw = e.p_adj = fit.p_values[static_cast<Eigen::Index>(j)];
  return e;
}

/// Adjusts one family of estimates in place.
void adjust_family(std::span<Estimate* const> family, double alpha) {
  std::vector<double> raw;
  raw.reserve(family.size());
  for (const auto* e : family) raw.push_back(e->p_raw);
  const auto adj = bh_adjust(raw);
  for (std::size_t i = 0; i < family.size(); ++i) {
    family[i]->p_adj = adj[i];
    family[i]->significant = adj[i] < alpha;
  }
}

void require_n(std::size_t n, std::size_t needed, std::string_view feature) {
  if (n < needed) {
    throw SampleTooSmall("analysis of " + std::string(feature) + " has " + std::to_string(n) +
                         " complete cases; needs at least " + std::to_string(needed));
  }
}

/// Beta of column 0 of `predictors` (standardized) on the standardized outcome.
OlsFit adjusted_fit(std::span<const double> outcome, std::span<const NamedColumn> predictors) {
  return ols(standardized_design(outcome, predictors));
}

}  // namespace

std::vector<std::string> concurrent_covariates() {
  return {std::string(kAgeColumn), std::string(kGenderColumn), std::string(kOccupationColumn),
          std::string(kYearsSince911Column)};
}

std::vector<std::string> trajectory_covariates() {
  return {std::string(kOccupationColumn), std::string(kGenderColumn), std::string(kYearsSince911Column),
          std::string(kInterviewPclColumn), std::string(kAgeColumn)};
}

std::vector<std::string> assessment_features() {
  return {kAssessmentNames.begin(), kAssessmentNames.end()};
}

AnalysisFrame::AnalysisFrame(std::vector<std::string> ids) : ids_(std::move(ids)) {}

void AnalysisFrame::set_column(const std::string& name, Column values) {
  if (values.size() != ids_.size()) throw DomainError("column '" + name + "' has the wrong length");
  columns_[name] = std::move(values);
}

bool AnalysisFrame::has_column(std::string_view name) const { return columns_.find(name) != columns_.end(); }

const AnalysisFrame::Column& AnalysisFrame::column(std::string_view name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw DomainError("analysis frame has no column '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> AnalysisFrame::column_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : columns_) out.push_back(name);
  return out;
}

AnalysisFrame::CompleteCases AnalysisFrame::complete_cases(std::span<const std::string> names) const {
  std::vector<const Column*> cols;
  for (const auto& name : names) cols.push_back(&column(name));
  CompleteCases cc;
  cc.columns.resize(names.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const bool complete = std::all_of(cols.begin(), cols.end(), [&](const Column* c) {
      return (*c)[i].has_value() && std::isfinite(*(*c)[i]);
    });
    if (!complete) continue;
    cc.ids.push_back(ids_[i]);
    for (std::size_t j = 0; j < cols.size(); ++j) cc.columns[j].push_back(*(*cols[j])[i]);
  }
  return cc;
}

AnalysisFrame build_analysis_frame(const AssessmentTable& assessments, const AnalysisSample& sample,
                                   std::span<const Demographics> demographics,
                                   std::span<const TrajectoryFit> trajectories, Eligibility eligibility) {
  std::map<std::string_view, const Demographics*> demo;
  for (const auto& d : demographics) demo.emplace(d.responder_id, &d);
  std::map<std::string_view, const TrajectoryFit*> fits;
  for (const auto& f : trajectories) fits.emplace(f.responder_id, &f);

  std::vector<const SampleEntry*> rows;
  std::vector<const AssessmentRecord*> recs;
  for (const auto& e : sample.entries) {
    const bool eligible = eligibility == Eligibility::concurrent ? e.eligible_concurrent : e.eligible_trajectory;
    if (!eligible) continue;
    const auto* rec = assessments.find(e.responder_id);
    if (!rec) continue;
    rows.push_back(&e);
    recs.push_back(rec);
  }

  std::vector<std::string> ids;
  for (const auto* e : rows) ids.push_back(e->responder_id);
  AnalysisFrame frame(std::move(ids));

  for (std::size_t k = 0; k < kAssessmentCount; ++k) {
    AnalysisFrame::Column col;
    for (const auto* r : recs) col.emplace_back(r->scores[k]);
    frame.set_column(std::string(kAssessmentNames[k]), std::move(col));
  }

  AnalysisFrame::Column interview_pcl, age, gender, occupation, years, marital, slope;
  for (const auto* e : rows) {
    interview_pcl.push_back(e->baseline_pcl ? std::optional<double>(e->baseline_pcl->score) : std::nullopt);
    auto d = demo.find(e->responder_id);
    if (d != demo.end()) {
      const auto& dm = *d->second;
      age.push_back(dm.age_at_interview);
      gender.push_back(dm.gender ? std::optional<double>(*dm.gender == Gender::female ? 1.0 : 0.0) : std::nullopt);
      occupation.push_back(dm.occupation_police ? std::optional<double>(*dm.occupation_police ? 1.0 : 0.0)
                                                : std::nullopt);
      years.push_back(dm.years_since_911);
      switch (dm.marital_status) {
        case MaritalStatus::married: marital.emplace_back(1.0); break;
        case MaritalStatus::not_married: marital.emplace_back(0.0); break;
        case MaritalStatus::unknown: marital.emplace_back(std::nullopt); break;
      }
    } else {
      age.emplace_back();
      gender.emplace_back();
      occupation.emplace_back();
      years.emplace_back();
      marital.emplace_back();
    }
    auto f = fits.find(e->responder_id);
    slope.push_back(f != fits.end() ? std::optional<double>(f->second->slope) : std::nullopt);
  }
  frame.set_column(std::string(kInterviewPclColumn), std::move(interview_pcl));
  frame.set_column(std::string(kAgeColumn), std::move(age));
  frame.set_column(std::string(kGenderColumn), std::move(gender));
  frame.set_column(std::string(kOccupationColumn), std::move(occupation));
  frame.set_column(std::string(kYearsSince911Column), std::move(years));
  frame.set_column(std::string(kMaritalColumn), std::move(marital));
  frame.set_column(std::string(kSlopeColumn), std::move(slope));
  return frame;
}

AssociationResult estimate_association(const AnalysisFrame& frame, std::string_view feature,
                                       std::string_view outcome, std::span<const std::string> covariates,
                                       const AnalysisOptions& options) {
  const auto names = concat({feature, outcome}, covariates);
  const auto cc = frame.complete_cases(names);
  const std::size_t n = cc.ids.size();
  require_n(n, std::max(options.min_n, covariates.size() + 3), feature);

  AssociationResult res;
  res.feature_name = std::string(feature);
  res.n = n;
  res.r = from_correlation(pearson_r(cc.columns[0], cc.columns[1], options.level));

  std::vector<NamedColumn> predictors;
  predictors.push_back({std::string(feature), cc.columns[0]});
  for (std::size_t j = 0; j < covariates.size(); ++j) predictors.push_back({covariates[j], cc.columns[j + 2]});
  res.beta = from_fit(adjusted_fit(cc.columns[1], predictors), 1, options.level);
  return res;
}

std::vector<AssociationResult> association_table(const AnalysisFrame& frame, std::span<const std::string> features,
                                                 std::string_view outcome, std::span<const std::string> covariates,
                                                 const AnalysisOptions& options) {
  std::vector<AssociationResult> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(estimate_association(frame, f, outcome, covariates, options));
  std::vector<Estimate*> r_family, beta_family;
  for (auto& res : out) {
    r_family.push_back(&res.r);
    beta_family.push_back(&res.beta);
  }
  adjust_family(r_family, options.alpha);
  adjust_family(beta_family, options.alpha);
  return out;
}

std::vector<AssociationResult> concurrent_associations(const AnalysisFrame& frame, const AnalysisOptions& options) {
  const auto features = assessment_features();
  const auto covs = concurrent_covariates();
  return association_table(frame, features, kInterviewPclColumn, covs, options);
}

std::vector<AssociationResult> trajectory_associations(const AnalysisFrame& frame, const AnalysisOptions& options) {
  const auto features = assessment_features();
  const auto covs = trajectory_covariates();
  return association_table(frame, features, kSlopeColumn, covs, options);
}

SuppressionRow suppression_scan(const AnalysisFrame& frame, std::string_view feature, std::string_view outcome,
                                std::span<const std::string> covariates, const AnalysisOptions& options) {
  const auto names = concat({feature, outcome}, covariates);
  const auto cc = frame.complete_cases(names);
  const std::size_t n = cc.ids.size();
  require_n(n, std::max(options.min_n, covariates.size() + 3), feature);

  SuppressionRow row;
  row.feature_name = std::string(feature);
  row.n = n;
  row.unadjusted = from_correlation(pearson_r(cc.columns[0], cc.columns[1], options.level));

  const NamedColumn x{std::string(feature), cc.columns[0]};
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    const std::vector<NamedColumn> predictors{x, {covariates[j], cc.columns[j + 2]}};
    row.single_covariate.emplace_back(covariates[j], from_fit(adjusted_fit(cc.columns[1], predictors), 1, options.level));
  }
  std::vector<NamedColumn> all{x};
  for (std::size_t j = 0; j < covariates.size(); ++j) all.push_back({covariates[j], cc.columns[j + 2]});
  row.adjusted = from_fit(adjusted_fit(cc.columns[1], all), 1, options.level);
  return row;
}

std::vector<SuppressionRow> suppression_table(const AnalysisFrame& frame, std::span<const std::string> features,
                                              std::string_view outcome, std::span<const std::string> covariates,
                                              const AnalysisOptions& options) {
  std::vector<SuppressionRow> rows;
  for (const auto& f : features) rows.push_back(suppression_scan(frame, f, outcome, covariates, options));
  const std::size_t columns = covariates.size() + 2;
  for (std::size_t c = 0; c < columns; ++c) {
    std::vector<Estimate*> family;
    for (auto& row : rows) {
      if (c == 0) {
        family.push_back(&row.unadjusted);
      } else if (c == columns - 1) {
        family.push_back(&row.adjusted);
      } else {
        family.push_back(&row.single_covariate[c - 1].second);
      }
    }
    adjust_family(family, options.alpha);
  }
  return rows;
}

MediationResult marital_mediation(const AnalysisFrame& frame, std::string_view feature, std::string_view outcome,
                                  std::span<const std::string> covariates, const AnalysisOptions& options) {
  std::vector<std::string> with(covariates.begin(), covariates.end());
  with.emplace_back(kMaritalColumn);
  const auto names = concat({feature, outcome}, with);
  const auto cc = frame.complete_cases(names);
  const std::size_t n = cc.ids.size();
  require_n(n, std::max(options.min_n, with.size() + 3), feature);

  const auto r = from_correlation(pearson_r(cc.columns[0], cc.columns[1], options.level));
  std::vector<NamedColumn> predictors{{std::string(feature), cc.columns[0]}};
  for (std::size_t j = 0; j < covariates.size(); ++j) predictors.push_back({covariates[j], cc.columns[j + 2]});

  MediationResult out;
  out.without_marital = {std::string(feature), n, r, from_fit(adjusted_fit(cc.columns[1], predictors), 1, options.level)};
  predictors.push_back({std::string(kMaritalColumn), cc.columns[covariates.size() + 2]});
  out.with_marital = {std::string(feature), n, r, from_fit(adjusted_fit(cc.columns[1], predictors), 1, options.level)};
  return out;
}

std::vector<MediationResult> mediation_table(const AnalysisFrame& frame, std::span<const std::string> features,
                                             std::string_view outcome, std::span<const std::string> covariates,
                                             const AnalysisOptions& options) {
  std::vector<MediationResult> rows;
  for (const auto& f : features) rows.push_back(marital_mediation(frame, f, outcome, covariates, options));
  std::vector<Estimate*> r_family, without_family, with_family;
  for (auto& row : rows) {
    r_family.push_back(&row.without_marital.r);
    without_family.push_back(&row.without_marital.beta);
    with_family.push_back(&row.with_marital.beta);
  }
  adjust_family(r_family, options.alpha);
  adjust_family(without_family, options.alpha);
  adjust_family(with_family, options.alpha);
  for (auto& row : rows) row.with_marital.r = row.without_marital.r;
  return rows;
}

JointEstimate joint_model(const PclPanel& panel, const AnalysisFrame& frame, std::string_view feature,
                          std::span<const std::string> covariates, const AnalysisOptions& options) {
  const auto names = concat({feature}, covariates);
  auto cc = frame.complete_cases(names);

  // Keep subjects that have a panel.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cc.ids.size(); ++i) {
    if (panel.find(cc.ids[i]) != panel.end()) keep.push_back(i);
  }
  require_n(keep.size(), std::max(options.min_n, covariates.size() + 3), feature);

  std::vector<std::vector<double>> z(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::vector<double> col;
    for (auto i : keep) col.push_back(cc.columns[j][i]);
    try {
      z[j] = standardize(col);
    } catch (const ConstantColumn&) {
      throw ConstantColumn("column '" + names[j] + "' is constant");
    }
  }

  std::size_t n_obs = 0;
  for (auto i : keep) {
    const auto& pts = panel.find(cc.ids[i])->second;
    if (pts.size() < 2) throw SingularDesign("subject " + cc.ids[i] + " has fewer than 2 time points");
    n_obs += pts.size();
  }

  // Subject intercepts are absorbed by demeaning t and PCL within subject.
  DesignMatrix d;
  d.column_names.emplace_back("t");
  for (const auto& name : names) d.column_names.push_back("t:" + name);
  d.rows.resize(static_cast<Eigen::Index>(n_obs), static_cast<Eigen::Index>(names.size() + 1));
  d.outcome.resize(static_cast<Eigen::Index>(n_obs));
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < keep.size(); ++s) {
    const auto& pts = panel.find(cc.ids[keep[s]])->second;
    CompensatedSum st, sy;
    for (const auto& p : pts) {
      st.add(p.t);
      sy.add(p.pcl);
    }
    const double t_mean = st.value() / static_cast<double>(pts.size());
    const double y_mean = sy.value() / static_cast<double>(pts.size());
    for (const auto& p : pts) {
      const double dt = p.t - t_mean;
      d.rows(row, 0) = dt;
      for (std::size_t j = 0; j < names.size(); ++j) d.rows(row, static_cast<Eigen::Index>(j + 1)) = dt * z[j][s];
      d.outcome[row] = p.pcl - y_mean;
      ++row;
    }
  }

  const auto fit = ols(d, keep.size());
  JointEstimate est;
  est.feature_name = std::string(feature);
  est.alpha1 = fit.coefficients[1];
  est.se = fit.standard_errors[1];
  est.ci = fit.ci(1, options.level);
  est.p_raw = est.p_adj = fit.p_values[1];
  est.n_subjects = keep.size();
  est.n_observations = n_obs;
  return est;
}

std::vector<JointEstimate> joint_model_table(const PclPanel& panel, const AnalysisFrame& frame,
                                             std::span<const std::string> features,
                                             std::span<const std::string> covariates,
                                             const AnalysisOptions& options) {
  std::vector<JointEstimate> out;
  for (const auto& f : features) out.push_back(joint_model(panel, frame, f, covariates, options));
  std::vector<double> raw;
  for (const auto& e : out) raw.push_back(e.p_raw);
  const auto adj = bh_adjust(raw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].p_adj = adj[i];
  return out;
}

std::string_view to_string(TertileGroup group) { return group == TertileGroup::top ? "top" : "bottom"; }

TertilePair tertile_trajectories(std::string_view feature_name, const ScoreMap& feature_scores,
                                 const PclPanel& panel, const ScoreMap& baseline_pcl, std::size_t grid_points) {
  if (grid_points < 2) throw DomainError("tertile grid needs at least 2 points");
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [id, score] : feature_scores) {
    if (panel.find(id) != panel.end() && baseline_pcl.find(id) != baseline_pcl.end() && std::isfinite(score)) {
      ranked.emplace_back(score, id);
    }
  }
  const std::size_t n = ranked.size();
  if (n < 6) throw SampleTooSmall("tertile curves need at least 6 responders, got " + std::to_string(n));
  std::sort(ranked.begin(), ranked.end());
  const std::size_t k = (n + 2) / 3;

  // Cohort-wide regression of PCL on baseline PCL over all observations.
  std::size_t n_obs = 0;
  for (const auto& [_, id] : ranked) n_obs += panel.find(id)->second.size();
  DesignMatrix d;
  d.column_names = {"(intercept)", std::string(kInterviewPclColumn)};
  d.rows.resize(static_cast<Eigen::Index>(n_obs), 2);
  d.outcome.resize(static_cast<Eigen::Index>(n_obs));
  Eigen::Index row = 0;
  for (const auto& [_, id] : ranked) {
    const double base = baseline_pcl.find(id)->second;
    for (const auto& p : panel.find(id)->second) {
      d.rows(row, 0) = 1.0;
      d.rows(row, 1) = base;
      d.outcome[row] = p.pcl;
      ++row;
    }
  }
  const auto cohort_fit = ols(d);

  std::map<std::string, TrajectoryFit, std::less<>> subject_lines;
  row = 0;
  for (const auto& [_, id] : ranked) {
    const auto& pts = panel.find(id)->second;
    std::vector<TimedScore> adjusted;
    for (const auto& p : pts) adjusted.push_back({p.t, cohort_fit.residuals[row++]});
    subject_lines.emplace(id, fit_subject_trajectory(adjusted));
  }

  auto make_series = [&](TertileGroup group, auto first, auto last) {
    TertileSeries s;
    s.feature_name = std::string(feature_name);
    s.group = group;
    for (auto it = first; it != last; ++it) s.members.push_back(it->second);
    std::sort(s.members.begin(), s.members.end());
    s.group_size = s.members.size();
    return s;
  };
  TertilePair pair{make_series(TertileGroup::top, ranked.end() - static_cast<std::ptrdiff_t>(k), ranked.end()),
                   make_series(TertileGroup::bottom, ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k))};

  double horizon = INFINITY;
  for (const auto* s : {&pair.top, &pair.bottom}) {
    for (const auto& id : s->members) {
      double last = 0.0;
      for (const auto& p : panel.find(id)->second) last = std::max(last, p.t);
      horizon = std::min(horizon, last);
    }
  }

  for (auto* s : {&pair.top, &pair.bottom}) {
    CompensatedSum slope_sum;
    for (const auto& id : s->members) slope_sum.add(subject_lines.find(id)->second.slope);
    s->mean_slope = slope_sum.value() / static_cast<double>(s->members.size());
    for (std::size_t g = 0; g < grid_points; ++g) {
      const double t = horizon * static_cast<double>(g) / static_cast<double>(grid_points - 1);
      CompensatedSum sum;
      for (const auto& id : s->members) {
        const auto& line = subject_lines.find(id)->second;
        sum.add(line.intercept + line.slope * t);
      }
      s->grid_t.push_back(t);
      s->mean_adjusted_pcl.push_back(sum.value() / static_cast<double>(s->members.size()));
    }
  }
  return pair;
}

}  // namespace langtraj
