#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xindex/doi.hpp"
#include "xindex/ris.hpp"

namespace xindex {

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

/// A cited paper: the unit the corpus manifest enumerates.
struct PaperRef {
  std::string doi;  // normalized
  std::string venue;
  int pub_year = 0;

  friend bool operator==(const PaperRef&, const PaperRef&) = default;
};

/// One citing work of `cited`.
struct CitationRecord {
  PaperRef cited;
  std::optional<std::string> citing_doi;
  std::vector<std::string> source_strings;
  std::optional<int> citation_year;
  std::optional<std::string> title;

  friend bool operator==(const CitationRecord&, const CitationRecord&) = default;
};

// RIS tags that may carry the citing venue, in the order they are collected.
inline constexpr std::array<std::string_view, 6> kSourceTags = {"T2", "JO", "JF", "JA", "BT", "J2"};

/// First maximal run of exactly four ASCII digits, if it lies in
/// [kMinYear, kMaxYear]. "2021///" -> 2021, "c. 1999-2001" -> 1999,
/// "20210" -> nullopt.
inline std::optional<int> extract_year(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] < '0' || s[i] > '9') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j - i == 4) {
      const int y = (s[i] - '0') * 1000 + (s[i + 1] - '0') * 100 + (s[i + 2] - '0') * 10 + (s[i + 3] - '0');
      if (y >= kMinYear && y <= kMaxYear) return y;
      return std::nullopt;
    }
    i = j;
  }
  return std::nullopt;
}

inline CitationRecord to_citation_record(const ris::RawRecord& raw, const PaperRef& cited) {
  CitationRecord rec;
  rec.cited = cited;
  for (auto tag : kSourceTags)
    for (auto v : raw.values(tag)) {
      auto t = trim(v);
      if (!t.empty()) rec.source_strings.emplace_back(t);
    }
  if (const auto* py = raw.first_of({"PY", "Y1"})) rec.citation_year = extract_year(py->value);
  if (const auto* doi = raw.first_of({"DO"})) rec.citing_doi = normalize_doi(doi->value);
  if (const auto* ti = raw.first_of({"TI", "T1"})) {
    auto t = trim(ti->value);
    if (!t.empty()) rec.title = std::string(t);
  }
  return rec;
}

}  // namespace xindex
