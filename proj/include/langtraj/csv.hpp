#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Minimal delimited-table reader/writer shared by every file format in the
// project. Comma separated, RFC 4180 quoting, '#' comment lines allowed.
namespace langtraj::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

class Reader {
 public:
  /// Reads the header immediately; leading '#' lines are kept as comments.
  Reader(std::istream& in, std::string source);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::string>& comments() const { return comments_; }
  const std::string& source() const { return source_; }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws SchemaError naming the source if the column is absent.
  std::size_t column(std::string_view name) const;

  /// Next data row; blank and comment lines are skipped. Rows whose field
  /// count differs from the header raise ParseError.
  std::optional<Row> next();

  /// "<source>:<line>" prefix for error messages.
  std::string where(std::size_t line) const;

 private:
  std::istream& in_;
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::string> comments_;
  std::size_t line_ = 0;
};

std::vector<std::string> split_line(std::string_view line);
std::string escape(std::string_view field);
void write_row(std::ostream& out, std::span<const std::string> fields);
void write_row(std::ostream& out, std::initializer_list<std::string> fields);

/// Shortest representation that round-trips exactly.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view where);
long long parse_integer(std::string_view text, std::string_view where);

}  // namespace langtraj::csv
