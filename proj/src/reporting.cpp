#include "langtraj/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "langtraj/csv.hpp"
#include "langtraj/errors.hpp"

namespace langtraj {

namespace {

constexpr std::array<std::string_view, kAssessmentCount> kDisplayLabels = {
    "Anxiety",       "Depression",          "Neuroticism", "Extraversion",    "First-Person Singular",
    "First-Person Plural", "Articles", "AVG Word Length", "Word Count"};

std::size_t canonical_rank(std::string_view feature) {
  if (auto a = parse_assessment_name(feature)) return static_cast<std::size_t>(*a);
  return kAssessmentCount;
}

/// Indices of `names` in canonical order; unknown names keep input order.
template <typename Range, typename NameOf>
std::vector<std::size_t> canonical_order(const Range& rows, NameOf name_of) {
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return canonical_rank(name_of(rows[a])) < canonical_rank(name_of(rows[b]));
  });
  return idx;
}

void require_rows(std::size_t n, std::string_view what) {
  if (n == 0) throw DomainError(std::string(what) + " has no rows to render");
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const auto& [key, value] : manifest) out << "# " << key << '=' << value << '\n';
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::vector<std::string> estimate_fields(const Estimate& e) {
  return {csv::format_double(e.value), csv::format_double(e.ci.lo), csv::format_double(e.ci.hi),
          csv::format_double(e.p_raw), csv::format_double(e.p_adj), flag(e.significant)};
}

std::vector<std::string> estimate_headers(std::string_view prefix) {
  std::string p(prefix);
  return {p, p + "_lo", p + "_hi", p + "_p_raw", p + "_p_adj", p + "_significant"};
}

void append(std::vector<std::string>& to, std::vector<std::string> from) {
  to.insert(to.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

std::string md_escape(std::string_view cell) {
  std::string out;
  for (char c : cell) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string RenderedTable::to_markdown() const {
  std::ostringstream out;
  if (!title.empty()) out << "**" << title << "**\n\n";
  out << '|';
  for (const auto& h : headers) out << ' ' << md_escape(h) << " |";
  out << "\n|";
  for (std::size_t i = 0; i < headers.size(); ++i) out << (i == 0 ? " :--- |" : " ---: |");
  out << '\n';
  for (const auto& row : rows) {
    out << '|';
    for (const auto& cell : row) out << ' ' << md_escape(cell) << " |";
    out << '\n';
  }
  return out.str();
}

std::string RenderedTable::to_tsv() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "\t" : "") << cells[i];
    out << '\n';
  };
  line(headers);
  for (const auto& row : rows) line(row);
  return out.str();
}

std::string format_fixed2(double value) {
  auto s = fmt::format("{:.2f}", value);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string format_estimate(const Estimate& e) {
  return fmt::format("{}{} [{}, {}]", format_fixed2(e.value), e.significant ? "*" : "", format_fixed2(e.ci.lo),
                     format_fixed2(e.ci.hi));
}

std::string display_label(std::string_view feature) {
  if (auto a = parse_assessment_name(feature)) return std::string(kDisplayLabels[static_cast<std::size_t>(*a)]);
  return std::string(feature);
}

RenderedTable render_association_table(std::span<const AssociationResult> results, std::string_view title) {
  require_rows(results.size(), "association table");
  RenderedTable t{std::string(title), {"Language-based assessment", "n", "r (without controls)", "beta (with controls)"}, {}};
  for (auto i : canonical_order(results, [](const AssociationResult& r) { return r.feature_name; })) {
    const auto& r = results[i];
    t.rows.push_back({display_label(r.feature_name), std::to_string(r.n), format_estimate(r.r), format_estimate(r.beta)});
  }
  return t;
}

RenderedTable render_suppression_table(std::span<const SuppressionRow> rows, std::string_view title) {
  require_rows(rows.size(), "suppression table");
  RenderedTable t{std::string(title), {"Language-based assessment", "n", "unadjusted"}, {}};
  for (const auto& [cov, _] : rows.front().single_covariate) t.headers.push_back("+" + cov);
  t.headers.emplace_back("all covariates");
  for (auto i : canonical_order(rows, [](const SuppressionRow& r) { return r.feature_name; })) {
    const auto& r = rows[i];
    std::vector<std::string> cells{display_label(r.feature_name), std::to_string(r.n), format_estimate(r.unadjusted)};
    for (const auto& [_, e] : r.single_covariate) cells.push_back(format_estimate(e));
    cells.push_back(format_estimate(r.adjusted));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

RenderedTable render_mediation_table(std::span<const MediationResult> rows, std::string_view title) {
  require_rows(rows.size(), "mediation table");
  RenderedTable t{std::string(title),
                  {"Language-based assessment", "n", "r", "beta", "beta (+ marital status)"},
                  {}};
  for (auto i : canonical_order(rows, [](const MediationResult& r) { return r.without_marital.feature_name; })) {
    const auto& r = rows[i];
    t.rows.push_back({display_label(r.without_marital.feature_name), std::to_string(r.without_marital.n),
                      format_estimate(r.without_marital.r), format_estimate(r.without_marital.beta),
                      format_estimate(r.with_marital.beta)});
  }
  return t;
}

RenderedTable render_joint_table(std::span<const JointEstimate> rows, std::string_view title) {
  require_rows(rows.size(), "joint model table");
  RenderedTable t{std::string(title), {"Language-based assessment", "subjects", "observations", "alpha1", "p_adj"}, {}};
  for (auto i : canonical_order(rows, [](const JointEstimate& r) { return r.feature_name; })) {
    const auto& r = rows[i];
    const Estimate e{r.alpha1, r.ci, r.p_raw, r.p_adj, false};
    t.rows.push_back({display_label(r.feature_name), std::to_string(r.n_subjects), std::to_string(r.n_observations),
                      format_estimate(e), fmt::format("{:.3g}", r.p_adj)});
  }
  return t;
}

void write_association_results(std::ostream& out, std::span<const AssociationResult> results,
                               const Manifest& manifest) {
  write_manifest(out, manifest);
  std::vector<std::string> header{"feature", "n"};
  append(header, estimate_headers("r"));
  append(header, estimate_headers("beta"));
  csv::write_row(out, header);
  for (const auto& r : results) {
    std::vector<std::string> row{r.feature_name, std::to_string(r.n)};
    append(row, estimate_fields(r.r));
    append(row, estimate_fields(r.beta));
    csv::write_row(out, row);
  }
}

AssociationResults read_association_results(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  AssociationResults out;
  for (const auto& c : reader.comments()) {
    std::string_view s = c;
    while (!s.empty() && (s.front() == '#' || s.front() == ' ')) s.remove_prefix(1);
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) continue;
    out.manifest.emplace_back(std::string(s.substr(0, eq)), std::string(s.substr(eq + 1)));
  }
  const auto feature = reader.column("feature");
  const auto n = reader.column("n");
  auto read_estimate = [&](const csv::Row& row, std::string_view prefix) {
    const auto names = estimate_headers(prefix);
    const auto where = reader.where(row.line);
    Estimate e;
    e.value = csv::parse_double(row.fields[reader.column(names[0])], where);
    e.ci.lo = csv::parse_double(row.fields[reader.column(names[1])], where);
    e.ci.hi = csv::parse_double(row.fields[reader.column(names[2])], where);
    e.p_raw = csv::parse_double(row.fields[reader.column(names[3])], where);
    e.p_adj = csv::parse_double(row.fields[reader.column(names[4])], where);
    const auto& sig = row.fields[reader.column(names[5])];
    if (sig != "0" && sig != "1") throw ParseError(where + ": significance flag must be 0 or 1");
    e.significant = sig == "1";
    return e;
  };
  while (auto row = reader.next()) {
    AssociationResult r;
    r.feature_name = row->fields[feature];
    const auto count = csv::parse_integer(row->fields[n], reader.where(row->line));
    if (count < 0) throw ParseError(reader.where(row->line) + ": negative n");
    r.n = static_cast<std::size_t>(count);
    r.r = read_estimate(*row, "r");
    r.beta = read_estimate(*row, "beta");
    out.results.push_back(std::move(r));
  }
  return out;
}

void write_suppression_results(std::ostream& out, std::span<const SuppressionRow> rows, const Manifest& manifest) {
  write_manifest(out, manifest);
  csv::write_row(out, {"feature", "n", "model", "beta", "lo", "hi", "p_raw", "p_adj", "significant"});
  auto emit = [&](const SuppressionRow& r, const std::string& model, const Estimate& e) {
    std::vector<std::string> row{r.feature_name, std::to_string(r.n), model};
    append(row, estimate_fields(e));
    csv::write_row(out, row);
  };
  for (const auto& r : rows) {
    emit(r, "unadjusted", r.unadjusted);
    for (const auto& [cov, e] : r.single_covariate) emit(r, "+" + cov, e);
    emit(r, "all", r.adjusted);
  }
}

void write_mediation_results(std::ostream& out, std::span<const MediationResult> rows, const Manifest& manifest) {
  write_manifest(out, manifest);
  std::vector<std::string> header{"feature", "n"};
  append(header, estimate_headers("r"));
  append(header, estimate_headers("beta"));
  append(header, estimate_headers("beta_marital"));
  csv::write_row(out, header);
  for (const auto& m : rows) {
    std::vector<std::string> row{m.without_marital.feature_name, std::to_string(m.without_marital.n)};
    append(row, estimate_fields(m.without_marital.r));
    append(row, estimate_fields(m.without_marital.beta));
    append(row, estimate_fields(m.with_marital.beta));
    csv::write_row(out, row);
  }
}

void write_joint_results(std::ostream& out, std::span<const JointEstimate> rows, const Manifest& manifest) {
  write_manifest(out, manifest);
  csv::write_row(out, {"feature", "n_subjects", "n_observations", "alpha1", "se", "lo", "hi", "p_raw", "p_adj"});
  for (const auto& j : rows) {
    csv::write_row(out, {j.feature_name, std::to_string(j.n_subjects), std::to_string(j.n_observations),
                         csv::format_double(j.alpha1), csv::format_double(j.se), csv::format_double(j.ci.lo),
                         csv::format_double(j.ci.hi), csv::format_double(j.p_raw), csv::format_double(j.p_adj)});
  }
}

void write_tertile_data(std::ostream& out, std::span<const TertilePair> pairs) {
  csv::write_row(out, {"feature", "group", "t", "mean_adjusted_pcl", "group_size"});
  for (const auto& pair : pairs) {
    for (const auto* s : {&pair.top, &pair.bottom}) {
      for (std::size_t g = 0; g < s->grid_t.size(); ++g) {
        csv::write_row(out, {s->feature_name, std::string(to_string(s->group)), csv::format_double(s->grid_t[g]),
                             csv::format_double(s->mean_adjusted_pcl[g]), std::to_string(s->group_size)});
      }
    }
  }
}

std::vector<TertilePair> read_tertile_data(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  const auto feature = reader.column("feature");
  const auto group = reader.column("group");
  const auto t = reader.column("t");
  const auto value = reader.column("mean_adjusted_pcl");
  std::vector<TertilePair> pairs;
  std::map<std::string, std::size_t> index;
  while (auto row = reader.next()) {
    const auto where = reader.where(row->line);
    const auto& name = row->fields[feature];
    auto [it, inserted] = index.emplace(name, pairs.size());
    if (inserted) {
      pairs.emplace_back();
      pairs.back().top.feature_name = pairs.back().bottom.feature_name = name;
      pairs.back().top.group = TertileGroup::top;
      pairs.back().bottom.group = TertileGroup::bottom;
    }
    auto& pair = pairs[it->second];
    TertileSeries* s = nullptr;
    if (row->fields[group] == "top") {
      s = &pair.top;
    } else if (row->fields[group] == "bottom") {
      s = &pair.bottom;
    } else {
      throw ParseError(where + ": group must be top or bottom");
    }
    const auto size = csv::parse_integer(row->fields[reader.column("group_size")], where);
    if (size < 0) throw ParseError(where + ": negative group_size");
    s->group_size = static_cast<std::size_t>(size);
    s->grid_t.push_back(csv::parse_double(row->fields[t], where));
    s->mean_adjusted_pcl.push_back(csv::parse_double(row->fields[value], where));
  }
  return pairs;
}

std::string tertile_svg(const TertilePair& pair) {
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 60;
  double t_max = 0, y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto* s : {&pair.top, &pair.bottom}) {
    for (double t : s->grid_t) t_max = std::max(t_max, t);
    for (double y : s->mean_adjusted_pcl) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(y_lo)) y_lo = y_hi = 0;
  if (t_max <= 0) t_max = 1;
  if (y_hi - y_lo < 1e-9) {
    y_lo -= 1;
    y_hi += 1;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  auto px = [&](double t) { return left + (W - left - right) * t / t_max; };
  auto py = [&](double y) { return H - bottom - (H - top - bottom) * (y - y_lo) / (y_hi - y_lo); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      W, H);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2,
                     display_label(pair.top.feature_name));
  // Axes and ticks.
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left, H - bottom,
                     W - right);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top, H - bottom);
  for (int i = 0; i <= 5; ++i) {
    const double t = t_max * i / 5.0;
    const double y = y_lo + (y_hi - y_lo) * i / 5.0;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", px(t), H - bottom + 18,
                       fmt::format("{:.1f}", t));
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left - 6, py(y) + 4,
                       format_fixed2(y));
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">Years after interview</text>\n",
                     left + (W - left - right) / 2, H - 16);
  svg += fmt::format(
      "<text x=\"16\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.1f})\">"
      "Adjusted PCL</text>\n",
      top + (H - top - bottom) / 2);

  auto series = [&](const TertileSeries& s, std::string_view color, double legend_y) {
    std::string points;
    for (std::size_t g = 0; g < s.grid_t.size(); ++g) {
      points += fmt::format("{}{:.2f},{:.2f}", g ? " " : "", px(s.grid_t[g]), py(s.mean_adjusted_pcl[g]));
    }
    svg += fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                       to_string(s.group), color, points);
    svg += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4:.1f}\" y=\"{5:.1f}\">{6} tertile (n={7})</text>\n",
        W - right - 150, legend_y, W - right - 125, color, W - right - 120, legend_y + 4,
        s.group == TertileGroup::top ? "Top" : "Bottom", s.group_size);
  };
  series(pair.top, "red", top + 8);
  series(pair.bottom, "blue", top + 26);
  svg += "</svg>\n";
  return svg;
}

PlotFiles emit_tertile_plot(const TertilePair& pair, const std::filesystem::path& stem) {
  PlotFiles files{stem, stem};
  files.data += ".csv";
  files.svg += ".svg";
  std::ostringstream data;
  write_tertile_data(data, std::span(&pair, 1));
  write_text(files.data, data.str());
  write_text(files.svg, tertile_svg(pair));
  return files;
}

}  // namespace langtraj
