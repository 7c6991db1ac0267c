#include "ppm/csv.hpp"

#include <istream>
#include <ostream>

#include "ppm/errors.hpp"

namespace ppm {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  int line = 1;
  int row_line = 1;
  bool header_done = false;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (!header_done) {
      table.header = std::move(fields);
      header_done = true;
    } else {
      if (fields.size() != table.header.size())
        throw DataError("csv: line " + std::to_string(row_line) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
      table.rows.push_back(CsvRow{std::move(fields), row_line});
    }
    fields.clear();
    row_started = false;
  };

  char c;
  while (in.get(c)) {
    if (!row_started) {
      row_started = true;
      row_line = line;
    }
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallow; the matching \n ends the row
    } else if (c == '\n') {
      ++line;
      end_row();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field starting near line " + std::to_string(row_line));
  if (row_started) end_row();  // final row without trailing newline
  if (!header_done) throw DataError("csv: empty input, header row required");
  return table;
}

static bool needs_quoting(const std::string& s) {
  for (char c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return true;
  return false;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    const std::string& f = fields[i];
    if (needs_quoting(f)) {
      out << '"';
      for (char c : f) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      out << f;
    }
  }
  out << '\n';
}

}  // namespace ppm
