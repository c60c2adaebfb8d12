#include "pmod/partition/csv.hpp"

#include "pmod/common/error.hpp"

namespace pmod::partition {

namespace {

bool needs_quotes(std::string_view f) {
  return f.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view f, bool lone) {
  if (!needs_quotes(f) && !(lone && f.empty())) {
    out += f;
    return;
  }
  out += '"';
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

Table parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> starts{0};
  std::vector<std::string> record;
  std::string field;
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n == 0) throw ParseError(0, "empty CSV input");

  while (i < n) {
    if (text[i] == '"') {
      const std::size_t open = i++;
      for (;;) {
        if (i >= n) throw ParseError(open, "unterminated quoted field");
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += text[i++];
      }
      if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
        throw ParseError(i, "unexpected character after closing quote");
    } else {
      while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        if (text[i] == '"') throw ParseError(i, "quote inside an unquoted field");
        field += text[i++];
      }
    }
    record.push_back(std::move(field));
    field.clear();
    if (i >= n) break;
    if (text[i] == ',') {
      ++i;
      if (i == n) record.emplace_back();
      continue;
    }
    if (text[i] == '\r') {
      if (i + 1 >= n || text[i + 1] != '\n') throw ParseError(i, "bare carriage return");
      ++i;
    }
    ++i;  // '\n'
    starts.push_back(i);
    records.push_back(std::move(record));
    record.clear();
  }
  if (!record.empty()) records.push_back(std::move(record));

  Table t;
  t.header = std::move(records.front());
  const std::size_t width = t.header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width)
      throw ParseError(starts[r], "row " + std::to_string(r) + " has " +
                                   std::to_string(records[r].size()) + " fields, expected " +
                                   std::to_string(width));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string write_csv(const Table& t) {
  std::string out;
  const bool lone = t.header.size() == 1;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      append_field(out, cells[c], lone);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

}  // namespace pmod::partition
