#pragma once

// Minimal reader for the project's comma-separated fixture files: a header
// row, no quoting, blank lines and '#' comments skipped.

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace decline::detail {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

inline std::vector<std::string> split_fields(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string f = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    fields.push_back(first == std::string::npos ? std::string{} : f.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Reads all rows after checking the header matches `columns` exactly.
inline std::vector<CsvRow> read_csv(std::istream& in, const std::vector<std::string>& columns) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (!header && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
    if (split_fields(line) != columns) throw CsvError("unexpected header at line " + std::to_string(line_no) + ": " + line);
    header = true;
  }
  if (!header) throw CsvError("missing header row");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (fields.size() != columns.size()) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns.size()) + " fields");
    }
    rows.push_back({line_no, std::move(fields)});
  }
  return rows;
}

inline double parse_double(const CsvRow& row, std::size_t i) {
  std::size_t used = 0;
  try {
    const double v = std::stod(row.fields[i], &used);
    if (used == row.fields[i].size()) return v;
  } catch (const std::logic_error&) {
  }
  throw CsvError("line " + std::to_string(row.line) + ": bad number '" + row.fields[i] + "'");
}

}  // namespace decline::detail
