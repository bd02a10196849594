#include "pausekit/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pausekit/errors.hpp"

namespace pausekit::csv {

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  std::size_t i = 0;
  const std::size_t n = text.size();
  std::size_t line = 1;
  if (n >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // strip BOM

  while (i < n) {
    const std::size_t row_line = line;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool has_content = false;
    bool at_eof = false;

    for (;;) {
      if (i >= n) {
        at_eof = true;
        break;
      }
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
      } else if (c == '"' && field.empty()) {
        in_quotes = true;
        has_content = true;
        ++i;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        has_content = true;
        ++i;
      } else if (c == '\n') {
        ++line;
        ++i;
        break;
      } else if (c == '\r') {
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        ++line;
        ++i;
        break;
      } else {
        field += c;
        has_content = true;
        ++i;
      }
    }
    if (in_quotes) throw ParseError(row_line, "unterminated quoted field");
    fields.push_back(std::move(field));
    const bool blank = !has_content && fields.size() == 1 && fields[0].empty();
    if (!blank) rows.push_back(Row{std::move(fields), row_line});
    if (at_eof) break;
  }
  return rows;
}

std::string quote_field(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote_field(fields[i]);
  }
  return out;
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  std::uint64_t acc = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    const std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
    if (acc > (UINT64_MAX - digit) / 10) return false;
    acc = acc * 10 + digit;
  }
  out = acc;
  return true;
}

}  // namespace pausekit::csv

namespace pausekit::io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void ensure_dir(const std::string& path) {
  if (!path.empty()) std::filesystem::create_directories(path);
}

}  // namespace pausekit::io
