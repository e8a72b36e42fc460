#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xindex/error.hpp"
#include "xindex/text.hpp"

namespace xindex::ris {

struct Entry {
  std::string tag;  // two characters from [A-Z0-9]
  std::string value;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// One ER-terminated record, entries in file order. The terminating ER entry
/// is kept as the last entry.
struct RawRecord {
  std::vector<Entry> entries;

  /// Values for `tag` in record order.
  std::vector<std::string_view> values(std::string_view tag) const {
    std::vector<std::string_view> out;
    for (const auto& e : entries)
      if (e.tag == tag) out.emplace_back(e.value);
    return out;
  }

  const Entry* first_of(std::initializer_list<std::string_view> tags) const {
    for (const auto& e : entries)
      for (auto t : tags)
        if (e.tag == t) return &e;
    return nullptr;
  }

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

struct Warning {
  enum class Kind { TrailingGarbage, StrayLine };
  Kind kind;
  std::size_t line;
  std::string message;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<Warning> warnings;
};

inline bool is_tag_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }

/// Matches `^([A-Z0-9]{2})  - ?(.*)$` on a line with its terminator removed.
inline std::optional<Entry> match_tag_line(std::string_view line) {
  if (line.size() < 5) return std::nullopt;
  if (!is_tag_char(line[0]) || !is_tag_char(line[1])) return std::nullopt;
  if (line.substr(2, 3) != "  -") return std::nullopt;
  std::string_view value = line.substr(5);
  if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
  return Entry{std::string(line.substr(0, 2)), std::string(value)};
}

/// Splits on LF, dropping one trailing CR per line. A final line without a
/// terminator is still a line; a terminator at end of input adds nothing.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

/// Parses RIS text into records.
///
/// Lines matching the tag grammar start a new entry. Any other non-blank line
/// continues the previous entry's value, joined by a single space after both
/// are whitespace-trimmed at the seam. Blank lines are ignored. Non-tag lines
/// with no entry to continue are reported as stray lines. Whatever is still
/// open at end of input produces one TrailingGarbage warning and no record.
///
/// Throws EncodingError on malformed UTF-8 and MalformedRecordError when TY
/// appears while a previous record is still unterminated.
inline ParseResult parse_stream(std::string_view text) {
  if (text.substr(0, kUtf8Bom.size()) == kUtf8Bom) text.remove_prefix(kUtf8Bom.size());
  if (auto bad = find_invalid_utf8(text)) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < *bad; ++i)
      if (text[i] == '\n') ++line;
    throw EncodingError("invalid UTF-8 byte sequence", line);
  }

  ParseResult result;
  RawRecord open;
  std::vector<std::size_t> stray;  // stray lines seen since the last ER
  std::size_t open_since = 0;

  const auto lines = split_lines(text);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t lineno = idx + 1;
    const std::string_view line = lines[idx];

    if (auto entry = match_tag_line(line)) {
      if (entry->tag == "TY" && !open.entries.empty())
        throw MalformedRecordError("TY inside unterminated record opened at line " + std::to_string(open_since),
                                   lineno);
      if (open.entries.empty()) open_since = lineno;
      const bool terminator = entry->tag == "ER";
      open.entries.push_back(std::move(*entry));
      if (terminator) {
        result.records.push_back(std::move(open));
        open = RawRecord{};
        for (auto s : stray)
          result.warnings.push_back({Warning::Kind::StrayLine, s, "line outside any entry ignored"});
        stray.clear();
      }
      continue;
    }

    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (open.entries.empty()) {
      stray.push_back(lineno);
      continue;
    }
    auto& value = open.entries.back().value;
    while (!value.empty() && is_ascii_space(value.back())) value.pop_back();
    if (!value.empty()) value.push_back(' ');
    value.append(body);
  }

  if (!open.entries.empty() || !stray.empty()) {
    const std::size_t from = !stray.empty() ? stray.front() : open_since;
    const std::size_t first = open.entries.empty() ? from : std::min(from, open_since);
    result.warnings.push_back({Warning::Kind::TrailingGarbage, first,
                               "content after the last ER is not a complete record"});
  }
  return result;
}

/// Inverse of parse_stream for values without line breaks.
inline std::string serialize(const std::vector<RawRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    for (const auto& e : r.entries) {
      out += e.tag;
      out += "  - ";
      out += e.value;
      out += '\n';
    }
  }
  return out;
}

/// Number of lines carrying an ER tag. Used as the ground truth that
/// parse_stream's record count must match.
inline std::size_t count_er_tags(std::string_view text) {
  if (text.substr(0, kUtf8Bom.size()) == kUtf8Bom) text.remove_prefix(kUtf8Bom.size());
  std::size_t n = 0;
  for (auto line : split_lines(text))
    if (auto e = match_tag_line(line); e && e->tag == "ER") ++n;
  return n;
}

}  // namespace xindex::ris
