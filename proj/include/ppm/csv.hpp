#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ppm {

struct CsvRow {
  std::vector<std::string> fields;
  int line = 0;  // 1-based line of the row's first character, for diagnostics
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  // Index of a header column, or -1.
  int column(const std::string& name) const;
};

// RFC-4180-style reader: quoted fields, "" escapes, LF or CRLF line ends.
// A header row is required. Throws DataError on structural problems.
CsvTable read_csv(std::istream& in);

void write_csv_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace ppm
