#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "balance_forge/errors.hpp"

namespace balance_forge {

/// A parsed CSV file: header row plus data rows, all cells as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return npos;
  }
};

namespace detail {

// One record, honoring quoted fields ("" escapes a quote). Returns false at
// end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                            std::size_t line_no) {
  fields.clear();
  if (in.peek() == EOF) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (;;) {
    const int ci = in.get();
    if (ci == EOF) {
      if (quoted) {
        throw DataError("csv: unterminated quoted field near line " + std::to_string(line_no));
      }
      if (any || !field.empty()) fields.push_back(std::move(field));
      return !fields.empty();
    }
    const char c = static_cast<char>(ci);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        if (in.peek() == '\n') in.get();
        [[fallthrough]];
      case '\n':
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
        any = true;
    }
  }
}

}  // namespace detail

/// Read a CSV file with a mandatory header row. Every data row must have as
/// many cells as the header.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::vector<std::string> record;
  std::size_t line_no = 1;
  if (!detail::read_csv_record(in, record, line_no)) {
    throw DataError("csv '" + path + "': missing header row");
  }
  table.header = record;
  while (detail::read_csv_record(in, record, ++line_no)) {
    if (record.size() == 1 && record[0].empty()) continue;  // trailing blank line
    if (record.size() != table.header.size()) {
      throw DataError("csv '" + path + "' line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " cells, got " +
                      std::to_string(record.size()));
    }
    table.rows.push_back(record);
  }
  return table;
}

}  // namespace balance_forge
