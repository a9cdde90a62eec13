#include "mlmc/table.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "mlmc/error.hpp"

namespace mlmc {

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ConfigError("table has no column '" + std::string(name) + "'");
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc{} && p == last) return i;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc{} && p == last) return d;
  return s;
}

}  // namespace

std::string format_cell(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return quote_if_needed(*s);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(cell));
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_csv(const Table& table, std::ostream& out, std::string_view stamp) {
  out << "# " << stamp << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << quote_if_needed(table.columns[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << '\n';
  }
}

void write_csv_file(const Table& table, const std::string& path, std::string_view stamp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(table, out, stamp);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    if (header) {
      table.columns = std::move(fields);
      header = false;
      continue;
    }
    if (fields.size() != table.columns.size())
      throw ConfigError("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(table.columns.size()));
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_cell(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mlmc
