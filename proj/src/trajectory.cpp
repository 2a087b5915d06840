#include "langtraj/trajectory.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "langtraj/csv.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/numeric.hpp"

namespace langtraj {

TrajectoryFit fit_subject_trajectory(std::span<const TimedScore> points) {
  if (points.size() < 3) {
    throw DegenerateDesign("trajectory needs at least 3 points, got " + std::to_string(points.size()));
  }
  const auto n = static_cast<double>(points.size());
  CompensatedSum st, sy;
  for (const auto& p : points) {
    st.add(p.t);
    sy.add(p.pcl);
  }
  const double t_mean = st.value() / n;
  const double y_mean = sy.value() / n;

  CompensatedSum stt, sty;
  for (const auto& p : points) {
    const double dt = p.t - t_mean;
    stt.add(dt * dt);
    sty.add(dt * (p.pcl - y_mean));
  }
  if (!(stt.value() > 0.0)) throw DegenerateDesign("all trajectory time points are identical");

  TrajectoryFit fit;
  fit.slope = sty.value() / stt.value();
  fit.intercept = y_mean - fit.slope * t_mean;
  fit.n_points = static_cast<int>(points.size());
  CompensatedSum rss;
  for (const auto& p : points) {
    const double r = p.pcl - fit.intercept - fit.slope * p.t;
    rss.add(r * r);
  }
  fit.rss = std::max(0.0, rss.value());
  return fit;
}

std::vector<TimedScore> compute_time_offsets(std::span<const PclRecord> records, Date interview_date) {
  std::vector<TimedScore> out;
  for (const auto& r : records) {
    const long days = days_between(interview_date, r.date);
    if (days <= 0) continue;
    out.push_back({static_cast<double>(days) / kDaysPerYear, r.score});
  }
  return out;
}

PclPanel build_panel(std::span<const Transcript> transcripts, std::span<const PclRecord> records,
                     const AnalysisSample& sample) {
  std::map<std::string, std::vector<PclRecord>, std::less<>> by_id;
  for (const auto& r : records) by_id[r.responder_id].push_back(r);
  PclPanel panel;
  for (const auto& t : transcripts) {
    const auto* entry = sample.find(t.responder_id);
    if (!entry || !entry->eligible_trajectory) continue;
    panel[t.responder_id] = compute_time_offsets(by_id[t.responder_id], t.interview_date);
  }
  return panel;
}

std::vector<TrajectoryFit> fit_cohort_trajectories(const PclPanel& panel, const AnalysisSample& sample) {
  std::vector<TrajectoryFit> fits;
  for (const auto& e : sample.entries) {
    if (!e.eligible_trajectory) continue;
    auto it = panel.find(e.responder_id);
    if (it == panel.end()) continue;
    auto fit = fit_subject_trajectory(it->second);
    fit.responder_id = e.responder_id;
    fits.push_back(std::move(fit));
  }
  return fits;
}

void write_trajectory_table(std::ostream& out, std::span<const TrajectoryFit> fits) {
  csv::write_row(out, {"responder_id", "intercept", "slope", "n_points", "rss"});
  for (const auto& f : fits) {
    csv::write_row(out, {f.responder_id, csv::format_double(f.intercept), csv::format_double(f.slope),
                         std::to_string(f.n_points), csv::format_double(f.rss)});
  }
}

std::vector<TrajectoryFit> read_trajectory_table(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  const auto id = reader.column("responder_id");
  const auto b0 = reader.column("intercept");
  const auto b1 = reader.column("slope");
  const auto np = reader.column("n_points");
  const auto rss = reader.column("rss");
  std::vector<TrajectoryFit> fits;
  while (auto row = reader.next()) {
    const auto where = reader.where(row->line);
    TrajectoryFit f;
    f.responder_id = row->fields[id];
    f.intercept = csv::parse_double(row->fields[b0], where);
    f.slope = csv::parse_double(row->fields[b1], where);
    f.n_points = static_cast<int>(csv::parse_integer(row->fields[np], where));
    f.rss = csv::parse_double(row->fields[rss], where);
    if (f.n_points < 3 || f.rss < 0.0) throw ParseError(where + ": invalid trajectory fit");
    fits.push_back(std::move(f));
  }
  return fits;
}

}  // namespace langtraj
