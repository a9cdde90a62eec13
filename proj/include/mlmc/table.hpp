#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mlmc {

using Cell = std::variant<std::string, std::int64_t, double>;

/// Column-named rows written as CSV with a one-line '#' version stamp, a
/// header row, and 17-significant-digit doubles (always carrying a '.' or an
/// exponent, so they re-parse as doubles).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws ConfigError if the column does not exist.
  std::size_t column_index(std::string_view name) const;

  friend bool operator==(const Table&, const Table&) = default;
};

std::string format_cell(const Cell& cell);

/// Writes "# <stamp>", the header row and the body.
void write_csv(const Table& table, std::ostream& out, std::string_view stamp);
void write_csv_file(const Table& table, const std::string& path, std::string_view stamp);

/// Skips '#' lines; integers become int64, other numbers double, the rest strings.
Table read_csv(std::istream& in);

}  // namespace mlmc
