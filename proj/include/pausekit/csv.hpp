#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pausekit::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the row starts
};

// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Blank lines are skipped. Throws ParseError on an unterminated
// quote.
std::vector<Row> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string quote_field(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

// Stable numeric formatting used by every writer, so reruns are
// byte-identical. %.12g keeps integers clean ("240", not "240.000000").
std::string format_double(double v);

// Empty string for an absent statistic.
std::string format_optional(const std::optional<double>& v);

// Strict base-10 unsigned parse (digits only). Returns false on anything else.
bool parse_u64(std::string_view s, std::uint64_t& out);

}  // namespace pausekit::csv

namespace pausekit::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
void ensure_dir(const std::string& path);

}  // namespace pausekit::io
