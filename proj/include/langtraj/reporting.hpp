#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langtraj/associations.hpp"

namespace langtraj {

/// A table of already formatted cells.
struct RenderedTable {
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;

  std::string to_markdown() const;
  std::string to_tsv() const;
};

/// "0.38* [0.16, 0.56]": two decimals, star iff significant, "-0.00" shown as "0.00".
std::string format_estimate(const Estimate& estimate);
std::string format_fixed2(double value);

/// Human-readable row label for an assessment name ("first_person_plural" ->
/// "First-Person Plural"); unknown names are returned unchanged.
std::string display_label(std::string_view feature);

/// Rows follow the canonical assessment order regardless of input order;
/// features outside the nine are appended in input order. Throws DomainError
/// for empty input.
RenderedTable render_association_table(std::span<const AssociationResult> results, std::string_view title);
RenderedTable render_suppression_table(std::span<const SuppressionRow> rows, std::string_view title);
RenderedTable render_mediation_table(std::span<const MediationResult> rows, std::string_view title);
RenderedTable render_joint_table(std::span<const JointEstimate> rows, std::string_view title);

/// key=value pairs written as leading '#' comments of result tables.
using Manifest = std::vector<std::pair<std::string, std::string>>;

struct AssociationResults {
  std::vector<AssociationResult> results;
  Manifest manifest;
};

/// Header: feature,n,r,r_lo,r_hi,r_p_raw,r_p_adj,r_significant,
///         beta,beta_lo,beta_hi,beta_p_raw,beta_p_adj,beta_significant
void write_association_results(std::ostream& out, std::span<const AssociationResult> results,
                               const Manifest& manifest = {});
AssociationResults read_association_results(std::istream& in, std::string_view source = "results");

void write_suppression_results(std::ostream& out, std::span<const SuppressionRow> rows,
                               const Manifest& manifest = {});
void write_mediation_results(std::ostream& out, std::span<const MediationResult> rows,
                             const Manifest& manifest = {});
void write_joint_results(std::ostream& out, std::span<const JointEstimate> rows, const Manifest& manifest = {});

/// Long format, header: feature,group,t,mean_adjusted_pcl,group_size
void write_tertile_data(std::ostream& out, std::span<const TertilePair> pairs);
std::vector<TertilePair> read_tertile_data(std::istream& in, std::string_view source = "tertiles");

/// Self-contained SVG: top tertile red, bottom tertile blue, years on x,
/// adjusted PCL on y.
std::string tertile_svg(const TertilePair& pair);

struct PlotFiles {
  std::filesystem::path data;
  std::filesystem::path svg;
};

/// Writes <stem>.csv and <stem>.svg.
PlotFiles emit_tertile_plot(const TertilePair& pair, const std::filesystem::path& stem);

}  // namespace langtraj
