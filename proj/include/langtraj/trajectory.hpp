#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "langtraj/cohort.hpp"

namespace langtraj {

/// A post-interview PCL score at t years (365.25-day years) after the interview.
struct TimedScore {
  double t = 0.0;
  double pcl = 0.0;
};

struct TrajectoryFit {
  std::string responder_id;
  double intercept = 0.0;  // PCL units
  double slope = 0.0;      // PCL units per year
  int n_points = 0;
  double rss = 0.0;
};

/// Post-interview panels keyed by responder.
using PclPanel = std::map<std::string, std::vector<TimedScore>, std::less<>>;

/// Closed-form simple regression of pcl on t. Throws DegenerateDesign for
/// fewer than three points or when every t is identical.
TrajectoryFit fit_subject_trajectory(std::span<const TimedScore> points);

/// Years after the interview for strictly post-interview records, order
/// preserved. Records on or before the interview date are dropped.
std::vector<TimedScore> compute_time_offsets(std::span<const PclRecord> records, Date interview_date);

/// Panels for every trajectory-eligible responder in the sample.
PclPanel build_panel(std::span<const Transcript> transcripts, std::span<const PclRecord> records,
                     const AnalysisSample& sample);

/// One fit per trajectory-eligible responder, in sample order.
std::vector<TrajectoryFit> fit_cohort_trajectories(const PclPanel& panel, const AnalysisSample& sample);

/// Header: responder_id,intercept,slope,n_points,rss
void write_trajectory_table(std::ostream& out, std::span<const TrajectoryFit> fits);
std::vector<TrajectoryFit> read_trajectory_table(std::istream& in, std::string_view source = "trajectories");

}  // namespace langtraj
