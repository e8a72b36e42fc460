#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xindex/citation.hpp"
#include "xindex/csv.hpp"

namespace xindex {

struct RowError {
  std::size_t line;
  std::string message;
};

/// Cited-paper DOIs keyed by (venue acronym, publication year).
struct CorpusManifest {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::vector<std::string>> entries;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [_, dois] : entries) n += dois.size();
    return n;
  }

  /// Every cell flattened to PaperRefs, ordered by venue, year, then file order.
  std::vector<PaperRef> papers() const {
    std::vector<PaperRef> out;
    for (const auto& [key, dois] : entries)
      for (const auto& d : dois) out.push_back({d, key.first, key.second});
    return out;
  }

  std::vector<std::string> venues() const {
    std::vector<std::string> out;
    for (const auto& [key, _] : entries)
      if (out.empty() || out.back() != key.first) out.push_back(key.first);
    return out;
  }
};

struct ManifestLoad {
  CorpusManifest manifest;
  std::size_t duplicates = 0;
  std::vector<RowError> errors;
};

inline std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Reads a manifest CSV:
///
///     venue,year,doi
///     CHI,2015,10.1145/2702123.2702150
///
/// The header row is required. '#' starts a comment line. Rows with a bad
/// year or DOI are rejected into `errors`; the rest of the file still loads.
inline ManifestLoad load_corpus_manifest(std::string_view text) {
  if (text.substr(0, kUtf8Bom.size()) == kUtf8Bom) text.remove_prefix(kUtf8Bom.size());
  auto rows = csv::parse(text);
  if (rows.empty()) throw DataError("manifest is empty (expected header 'venue,year,doi')");

  const auto& header = rows.front().fields;
  if (header.size() != 3 || to_lower_ascii(trim(header[0])) != "venue" || to_lower_ascii(trim(header[1])) != "year" ||
      to_lower_ascii(trim(header[2])) != "doi")
    throw DataError("manifest header must be 'venue,year,doi'");

  ManifestLoad out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 3) {
      out.errors.push_back({row.line, "expected 3 fields, got " + std::to_string(row.fields.size())});
      continue;
    }
    const std::string venue(trim(row.fields[0]));
    if (venue.empty()) {
      out.errors.push_back({row.line, "empty venue"});
      continue;
    }
    const auto year = parse_int(row.fields[1]);
    if (!year || *year < kMinYear || *year > kMaxYear) {
      out.errors.push_back({row.line, "invalid year '" + row.fields[1] + "'"});
      continue;
    }
    auto doi = normalize_doi(row.fields[2]);
    if (!doi) {
      out.errors.push_back({row.line, "invalid DOI '" + row.fields[2] + "'"});
      continue;
    }
    auto& cell = out.manifest.entries[{venue, *year}];
    if (std::find(cell.begin(), cell.end(), *doi) != cell.end()) {
      ++out.duplicates;
      continue;
    }
    cell.push_back(std::move(*doi));
  }
  return out;
}

}  // namespace xindex
