#include "langtraj/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "langtraj/errors.hpp"

namespace langtraj::csv {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    strip_cr(line);
    if (is_blank(line)) continue;
    if (line.front() == '#') {
      comments_.push_back(line);
      continue;
    }
    header_ = split_line(line);
    return;
  }
  throw SchemaError(source_ + ": missing header row");
}

std::optional<std::size_t> Reader::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Reader::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw SchemaError(source_ + ": missing column '" + std::string(name) + "'");
}

std::optional<Row> Reader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    strip_cr(line);
    if (is_blank(line) || line.front() == '#') continue;
    Row row{line_, split_line(line)};
    if (row.fields.size() != header_.size()) {
      throw ParseError(where(line_) + ": expected " + std::to_string(header_.size()) +
                       " fields, found " + std::to_string(row.fields.size()));
    }
    return row;
  }
  return std::nullopt;
}

std::string Reader::where(std::size_t line) const {
  return source_ + ":" + std::to_string(line);
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

void write_row(std::ostream& out, std::initializer_list<std::string> fields) {
  write_row(out, std::span<const std::string>(fields.begin(), fields.size()));
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{}", value);
}

double parse_double(std::string_view text, std::string_view where) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError(std::string(where) + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(std::string_view text, std::string_view where) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError(std::string(where) + ": cannot parse integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace langtraj::csv
