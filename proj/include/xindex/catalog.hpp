#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "xindex/citation.hpp"
#include "xindex/csv.hpp"
#include "xindex/manifest.hpp"
#include "xindex/text.hpp"

namespace xindex {

enum class FieldLabel : unsigned char { OutOfField, InField };

struct VenueRule {
  std::string acronym;     // label only; "NA" allowed
  std::string identifier;  // as written in the catalog file
  std::string key;         // normalize_source_string(identifier), the match key
};

/// The set of venues that defines a field. Immutable once loaded.
class VenueCatalog {
public:
  VenueCatalog() = default;
  VenueCatalog(std::string name, std::vector<VenueRule> rules) : name_(std::move(name)), rules_(std::move(rules)) {}

  const std::string& name() const noexcept { return name_; }
  const std::vector<VenueRule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }

  /// True if some rule key is a substring of the already-normalized text.
  bool matches_normalized(std::string_view normalized) const {
    return std::any_of(rules_.begin(), rules_.end(),
                       [&](const VenueRule& r) { return normalized.find(r.key) != std::string_view::npos; });
  }

private:
  std::string name_;
  std::vector<VenueRule> rules_;
};

inline VenueRule make_rule(std::string acronym, std::string identifier) {
  auto key = normalize_source_string(identifier);
  return VenueRule{std::move(acronym), std::move(identifier), std::move(key)};
}

struct CatalogLoad {
  VenueCatalog catalog;
  std::vector<RowError> errors;
};

/// Reads a catalog CSV with header `acronym,identifier`. A comment line of
/// the form `# name: <label>` names the catalog; otherwise `default_name`
/// is used. Rows load in file order. Blank identifiers and repeated
/// (acronym, identifier) pairs are rejected into `errors`. Throws DataError
/// if no rule survives.
inline CatalogLoad load_catalog(std::string_view text, std::string default_name = "catalog") {
  if (text.substr(0, kUtf8Bom.size()) == kUtf8Bom) text.remove_prefix(kUtf8Bom.size());

  std::string name = std::move(default_name);
  for (auto line : ris::split_lines(text)) {
    auto t = trim(line);
    if (t.substr(0, 1) != "#") continue;
    t = trim(t.substr(1));
    if (t.substr(0, 5) == "name:") {
      name = std::string(trim(t.substr(5)));
      break;
    }
  }

  auto rows = csv::parse(text);
  if (rows.empty()) throw DataError("catalog is empty");
  const auto& header = rows.front().fields;
  if (header.size() != 2 || to_lower_ascii(trim(header[0])) != "acronym" ||
      to_lower_ascii(trim(header[1])) != "identifier")
    throw DataError("catalog header must be 'acronym,identifier'");

  CatalogLoad out;
  std::vector<VenueRule> rules;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 2) {
      out.errors.push_back({row.line, "expected 2 fields, got " + std::to_string(row.fields.size())});
      continue;
    }
    auto rule = make_rule(std::string(trim(row.fields[0])), std::string(trim(row.fields[1])));
    if (rule.key.empty()) {
      out.errors.push_back({row.line, "empty identifier"});
      continue;
    }
    const bool dup = std::any_of(rules.begin(), rules.end(), [&](const VenueRule& r) {
      return r.acronym == rule.acronym && r.identifier == rule.identifier;
    });
    if (dup) {
      out.errors.push_back({row.line, "duplicate rule (" + rule.acronym + ", " + rule.identifier + ")"});
      continue;
    }
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) throw DataError("catalog has no usable rules");
  out.catalog = VenueCatalog(std::move(name), std::move(rules));
  return out;
}

/// InField iff some rule identifier occurs in some source string, both
/// normalized. Records with no source strings are OutOfField.
inline FieldLabel classify_source(const CitationRecord& record, const VenueCatalog& catalog) {
  for (const auto& s : record.source_strings)
    if (catalog.matches_normalized(normalize_source_string(s))) return FieldLabel::InField;
  return FieldLabel::OutOfField;
}

}  // namespace xindex
