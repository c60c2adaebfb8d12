#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pmod::partition {

// A CSV file with a header row. Every data row has header.size() cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

// RFC 4180 reader. Accepts LF or CRLF line ends and an optional final line
// break. Throws ParseError (byte offset) on malformed quoting or ragged rows.
Table parse_csv(std::string_view text);

// Canonical form: LF line ends including the last line, fields quoted only
// when they contain a comma, quote, CR or LF, or are empty in a one-column
// table (so blank lines never appear).
std::string write_csv(const Table& t);

inline std::string canonicalize_csv(std::string_view text) { return write_csv(parse_csv(text)); }

}  // namespace pmod::partition
