#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "xindex/error.hpp"

namespace xindex::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader. Accepts LF or CRLF, quoted fields with embedded commas,
/// quotes ("") and newlines. Blank lines are skipped; so are lines whose first
/// character is '#' when `allow_comments` is set.
inline std::vector<Row> parse(std::string_view text, bool allow_comments = true) {
  std::vector<Row> rows;
  std::size_t i = 0, line = 1;
  const std::size_t n = text.size();

  while (i < n) {
    if (text[i] == '\n' || (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n')) {
      i += text[i] == '\r' ? 2 : 1;
      ++line;
      continue;
    }
    if (allow_comments && text[i] == '#') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }

    Row row;
    row.line = line;
    std::string field;
    bool in_quotes = false, was_quoted = false;
    for (;;) {
      if (i >= n) {
        if (in_quotes) throw ParseError("unterminated quoted field", row.line);
        row.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      if (c == '"' && field.empty() && !was_quoted) {
        in_quotes = was_quoted = true;
        ++i;
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
        ++i;
      } else if (c == '\n' || (c == '\r' && i + 1 < n && text[i + 1] == '\n')) {
        row.fields.push_back(std::move(field));
        i += c == '\r' ? 2 : 1;
        ++line;
        break;
      } else {
        if (was_quoted) throw ParseError("text after closing quote", line);
        field.push_back(c);
        ++i;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline bool needs_quoting(std::string_view field) {
  if (field.empty()) return false;
  if (field.front() == ' ' || field.back() == ' ' || field.front() == '#') return true;
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void append_field(std::string& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

/// One record terminated by LF.
template <typename Fields>
void append_row(std::string& out, const Fields& fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out.push_back(',');
    first = false;
    append_field(out, std::string_view(f));
  }
  out.push_back('\n');
}

}  // namespace xindex::csv
