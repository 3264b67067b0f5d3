#include "sociolex/csv.hpp"

#include <charconv>
#include <fstream>

#include "sociolex/common.hpp"

namespace sociolex::csv {

Row split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  Row out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw DataError(source + ": missing column '" + std::string(name) + "'");
}

Table read(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  Table t;
  t.source = path.string();
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    Row r = split_line(line);
    if (has_header && t.header.empty()) {
      t.header = std::move(r);
      width = t.header.size();
      continue;
    }
    if (width == 0) width = r.size();
    if (r.size() != width)
      throw DataError(t.source + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(width) + " fields, got " + std::to_string(r.size()));
    t.rows.push_back(std::move(r));
  }
  return t;
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

void Writer::row(const Row& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape(fields[i]);
  }
  out_ << '\n';
}

double to_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("invalid number '" + std::string(s) + "' for " + std::string(what));
  return v;
}

long long to_int(std::string_view s, std::string_view what) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("invalid integer '" + std::string(s) + "' for " + std::string(what));
  return v;
}

std::optional<double> to_optional_double(std::string_view s, std::string_view what) {
  if (s.empty()) return std::nullopt;
  return to_double(s, what);
}

std::string cell(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

}  // namespace sociolex::csv
