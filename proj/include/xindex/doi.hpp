#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "xindex/text.hpp"

namespace xindex {

// Resolver and scheme prefixes stripped before validation. Order matters:
// longer forms first so "https://dx.doi.org/" is not half-stripped.
inline constexpr std::array<std::string_view, 6> kDoiPrefixes = {
    "https://dx.doi.org/", "http://dx.doi.org/", "https://doi.org/",
    "http://doi.org/",     "doi.org/",           "doi:",
};

inline bool is_valid_doi(std::string_view doi) {
  if (doi.size() < 4 || doi.substr(0, 3) != "10.") return false;
  const auto slash = doi.find('/');
  if (slash == std::string_view::npos || slash == 3 || slash + 1 == doi.size()) return false;
  for (char c : doi)
    if (is_ascii_space(c)) return false;
  return true;
}

/// Lowercases, strips resolver prefixes and surrounding whitespace. Returns
/// nullopt unless the result looks like "10.<registrant>/<suffix>".
inline std::optional<std::string> normalize_doi(std::string_view raw) {
  std::string_view s = trim(raw);
  for (auto prefix : kDoiPrefixes) {
    if (starts_with_icase(s, prefix)) {
      s = trim(s.substr(prefix.size()));
      break;
    }
  }
  std::string doi = to_lower_ascii(s);
  if (!is_valid_doi(doi)) return std::nullopt;
  return doi;
}

/// File-name-safe encoding of a normalized DOI: [a-z0-9._-] pass through,
/// every other byte becomes %XX. Injective, so distinct DOIs never collide.
inline std::string doi_to_filename(std::string_view doi) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(doi.size() + 8);
  for (unsigned char c : doi) {
    const bool plain = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (plain) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace xindex
