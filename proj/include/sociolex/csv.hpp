#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sociolex::csv {

using Row = std::vector<std::string>;

/// Split one CSV line (RFC 4180 quoting, no embedded newlines).
Row split_line(std::string_view line);

/// Whole table in memory. With a header, columns are addressable by name.
struct Table {
  Row header;
  std::vector<Row> rows;

  /// Index of a header column; throws DataError naming the file when absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

  std::string source;  // path, for diagnostics
};

/// Read a CSV file. Rows whose width differs from the first row are rejected.
Table read(const std::filesystem::path& path, bool has_header = true);

/// Quote a field only when needed.
std::string escape(std::string_view field);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void row(const Row& fields);

 private:
  std::ostream& out_;
};

/// Parse helpers raising DataError with the offending text.
double to_double(std::string_view s, std::string_view what);
long long to_int(std::string_view s, std::string_view what);
/// Empty cell maps to nullopt.
std::optional<double> to_optional_double(std::string_view s, std::string_view what);

std::string cell(std::optional<double> v);

}  // namespace sociolex::csv
