#ifndef KNNICL_CSV_H_
#define KNNICL_CSV_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace knnicl {

struct CsvRow {
  std::vector<std::string> fields;
  // 1-based line number where the row starts (quoted fields may span lines).
  std::size_t line = 0;
};

// RFC 4180 reader: quoted fields, doubled-quote escapes, embedded commas and
// newlines, CRLF or LF line endings.
std::vector<CsvRow> read_csv(std::istream& in);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace knnicl

#endif  // KNNICL_CSV_H_
