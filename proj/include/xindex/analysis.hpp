#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xindex/catalog.hpp"
#include "xindex/citation.hpp"
#include "xindex/metric.hpp"

namespace xindex {

/// A cited paper together with the citing works retrieved for it.
struct CitedPaper {
  PaperRef ref;
  std::vector<CitationRecord> citations;
};

using Corpus = std::vector<CitedPaper>;

/// Month in which citation data was collected. The collection year itself
/// is incomplete, so the last full citation year is year - 1.
struct CutoffDate {
  int year = 0;
  int month = 1;

  int last_complete_year() const { return year - 1; }

  /// Parses "YYYY-MM".
  static CutoffDate parse(std::string_view s) {
    s = trim(s);
    if (s.size() != 7 || s[4] != '-') throw UsageError("cutoff must be YYYY-MM, got '" + std::string(s) + "'");
    auto y = parse_int(s.substr(0, 4));
    auto m = parse_int(s.substr(5, 2));
    if (!y || !m || *m < 1 || *m > 12 || *y < kMinYear || *y > kMaxYear)
      throw UsageError("cutoff must be YYYY-MM, got '" + std::string(s) + "'");
    return {*y, *m};
  }

  friend auto operator<=>(const CutoffDate&, const CutoffDate&) = default;
};

/// Records left out of a series, by reason. Each reason is counted once per
/// deduplicated citation.
struct ExclusionTally {
  std::size_t deduplicated = 0;   // same citing DOI for the same cited paper
  std::size_t yearless = 0;       // no citation year (dropped by windowed analyses)
  std::size_t after_cutoff = 0;   // citation year past the cutoff year
  std::size_t before_pub = 0;     // citation year earlier than publication year

  friend bool operator==(const ExclusionTally&, const ExclusionTally&) = default;
};

enum class CohortMode { Cumulative, FiveYearWindow };
enum class TrajectoryMode { PerYear, Cumulative };

struct CohortPoint {
  XIndexResult result;
  std::size_t papers = 0;
  /// Auxiliary: unweighted mean of per-paper X-indices over papers with at
  /// least one pooled citation. Not the headline statistic.
  std::optional<double> per_paper_mean;
};

struct CohortSeries {
  std::string venue;
  CohortMode mode = CohortMode::Cumulative;
  std::map<int, CohortPoint> points;  // keyed by publication year
  ExclusionTally tally;
};

struct TrajectorySeries {
  std::string venue;
  int pub_year = 0;
  TrajectoryMode mode = TrajectoryMode::PerYear;
  std::map<int, XIndexResult> points;  // keyed by citation year
  ExclusionTally tally;
};

struct RollingSeries {
  std::string venue;
  std::map<int, XIndexResult> points;  // keyed by citation year
  ExclusionTally tally;
};

inline constexpr int kWindowYears = 5;

/// One venue's citations, deduplicated and classified once so that every
/// analysis sees the same pool.
class PreparedVenue {
public:
  struct Citation {
    std::size_t paper;  // index into papers()
    std::optional<int> year;
    FieldLabel label;
  };

  PreparedVenue(const Corpus& corpus, const VenueCatalog& catalog, std::string venue) : venue_(std::move(venue)) {
    if (catalog.empty()) throw UsageError("catalog has no rules");
    for (const auto& paper : corpus) {
      if (paper.ref.venue != venue_) continue;
      const std::size_t idx = papers_.size();
      papers_.push_back(paper.ref);
      parsed_ += paper.citations.size();
      std::set<std::string_view> seen;
      for (const auto& c : paper.citations) {
        if (c.citing_doi && !seen.insert(*c.citing_doi).second) {
          ++deduplicated_;
          continue;
        }
        citations_.push_back({idx, c.citation_year, classify_source(c, catalog)});
      }
    }
    if (papers_.empty()) {
      std::set<std::string> available;
      for (const auto& p : corpus) available.insert(p.ref.venue);
      std::string names;
      for (const auto& v : available) names += (names.empty() ? "" : ", ") + v;
      throw UsageError("unknown venue '" + venue_ + "'; available: " + (names.empty() ? "(none)" : names));
    }
  }

  const std::string& venue() const noexcept { return venue_; }
  const std::vector<PaperRef>& papers() const noexcept { return papers_; }
  std::span<const Citation> citations() const noexcept { return citations_; }
  std::size_t parsed() const noexcept { return parsed_; }
  std::size_t deduplicated() const noexcept { return deduplicated_; }

  int pub_year(const Citation& c) const { return papers_[c.paper].pub_year; }

  /// Publication years with at least one paper, ascending.
  std::vector<int> pub_years() const {
    std::set<int> ys;
    for (const auto& p : papers_) ys.insert(p.pub_year);
    return {ys.begin(), ys.end()};
  }

  bool has_pub_year(int y) const {
    return std::any_of(papers_.begin(), papers_.end(), [y](const PaperRef& p) { return p.pub_year == y; });
  }

private:
  std::string venue_;
  std::vector<PaperRef> papers_;
  std::vector<Citation> citations_;
  std::size_t parsed_ = 0;
  std::size_t deduplicated_ = 0;
};

namespace detail {

inline std::vector<int> normalized_years(std::span<const int> years) {
  std::set<int> s(years.begin(), years.end());
  return {s.begin(), s.end()};
}

// Pools the cohort of `pub_year` over citations accepted by `keep`, and
// fills the per-paper auxiliary mean.
template <typename Keep>
CohortPoint pool_cohort(const PreparedVenue& v, int pub_year, Keep&& keep) {
  CohortPoint point;
  std::map<std::size_t, XIndexResult> per_paper;
  for (std::size_t i = 0; i < v.papers().size(); ++i)
    if (v.papers()[i].pub_year == pub_year) {
      per_paper[i];
      ++point.papers;
    }
  for (const auto& c : v.citations()) {
    if (v.pub_year(c) != pub_year || !keep(c)) continue;
    point.result += tally(c.label);
    per_paper[c.paper] += tally(c.label);
  }
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& [_, r] : per_paper)
    if (auto x = r.value()) {
      sum += *x;
      ++counted;
    }
  if (counted > 0) point.per_paper_mean = sum / static_cast<double>(counted);
  return point;
}

}  // namespace detail

/// Cumulative cohort X-index per publication year: every citation dated up
/// to the cutoff year, or undated, of every paper published that year.
/// Years without papers are omitted.
inline CohortSeries cohort_analysis(const PreparedVenue& v, std::span<const int> pub_years, CutoffDate cutoff) {
  if (pub_years.empty()) throw UsageError("cohort_analysis: no publication years requested");
  CohortSeries s{v.venue(), CohortMode::Cumulative, {}, {}};
  s.tally.deduplicated = v.deduplicated();
  const auto years = detail::normalized_years(pub_years);
  for (int y : years) {
    if (!v.has_pub_year(y)) continue;
    s.points[y] = detail::pool_cohort(v, y, [&](const PreparedVenue::Citation& c) {
      return !c.year || *c.year <= cutoff.year;
    });
  }
  for (const auto& c : v.citations()) {
    if (!std::binary_search(years.begin(), years.end(), v.pub_year(c))) continue;
    if (!c.year)
      ++s.tally.yearless;
    else if (*c.year > cutoff.year)
      ++s.tally.after_cutoff;
    else if (*c.year < v.pub_year(c))
      ++s.tally.before_pub;
  }
  return s;
}

/// Cohort X-index counting only citations dated pub_year+1 .. pub_year+5.
/// A year is eligible when its whole window ends by the last complete
/// citation year before the cutoff; ineligible and paperless years are
/// omitted. Undated citations are excluded and tallied.
inline CohortSeries five_year_window_analysis(const PreparedVenue& v, std::span<const int> pub_years,
                                              CutoffDate cutoff) {
  CohortSeries s{v.venue(), CohortMode::FiveYearWindow, {}, {}};
  s.tally.deduplicated = v.deduplicated();
  const auto years = pub_years.empty() ? v.pub_years() : detail::normalized_years(pub_years);
  for (int y : years) {
    if (y + kWindowYears > cutoff.last_complete_year() || !v.has_pub_year(y)) continue;
    s.points[y] = detail::pool_cohort(v, y, [&](const PreparedVenue::Citation& c) {
      return c.year && *c.year >= y + 1 && *c.year <= y + kWindowYears;
    });
  }
  for (const auto& c : v.citations())
    if (!c.year && s.points.contains(v.pub_year(c))) ++s.tally.yearless;
  return s;
}

/// X-index of one publication-year cohort for each citation year from
/// pub_year through the cutoff year. PerYear pools citations dated exactly
/// that year; Cumulative pools everything dated pub_year .. that year.
inline TrajectorySeries trajectory_analysis(const PreparedVenue& v, int pub_year, CutoffDate cutoff,
                                            TrajectoryMode mode = TrajectoryMode::PerYear) {
  if (!v.has_pub_year(pub_year))
    throw UsageError("trajectory_analysis: " + v.venue() + " has no papers published in " + std::to_string(pub_year));
  TrajectorySeries s{v.venue(), pub_year, mode, {}, {}};
  s.tally.deduplicated = v.deduplicated();
  for (int c = pub_year; c <= cutoff.year; ++c) s.points[c];
  for (const auto& c : v.citations()) {
    if (v.pub_year(c) != pub_year) continue;
    if (!c.year) {
      ++s.tally.yearless;
    } else if (*c.year < pub_year) {
      ++s.tally.before_pub;
    } else if (*c.year > cutoff.year) {
      ++s.tally.after_cutoff;
    } else {
      s.points[*c.year] += tally(c.label);
    }
  }
  if (mode == TrajectoryMode::Cumulative) {
    XIndexResult running;
    for (auto& [_, r] : s.points) {
      running += r;
      r = running;
    }
  }
  return s;
}

/// For each citation year y from (earliest publication year + 5) through the
/// last complete citation year: citations dated y of papers published in
/// y-5 .. y-1. Requires the venue's publication years to span >= 5 years.
inline RollingSeries rolling_analysis(const PreparedVenue& v, CutoffDate cutoff) {
  const auto years = v.pub_years();
  const int first = years.front(), last = years.back();
  if (last - first + 1 < kWindowYears)
    throw DataError("rolling_analysis: " + v.venue() + " publication years " + std::to_string(first) + "-" +
                    std::to_string(last) + " span fewer than " + std::to_string(kWindowYears) + " years");
  RollingSeries s{v.venue(), {}, {}};
  s.tally.deduplicated = v.deduplicated();
  const int start = first + kWindowYears, end = cutoff.last_complete_year();
  for (int y = start; y <= end; ++y) s.points[y];
  for (const auto& c : v.citations()) {
    if (!c.year) {
      ++s.tally.yearless;
      continue;
    }
    const int y = *c.year, p = v.pub_year(c);
    if (y < start || y > end) continue;
    if (p >= y - kWindowYears && p <= y - 1) s.points[y] += tally(c.label);
  }
  return s;
}

// Convenience overloads in terms of the raw corpus.

inline CohortSeries cohort_analysis(const Corpus& corpus, const VenueCatalog& catalog, const std::string& venue,
                                    std::span<const int> pub_years, CutoffDate cutoff) {
  return cohort_analysis(PreparedVenue(corpus, catalog, venue), pub_years, cutoff);
}

inline CohortSeries five_year_window_analysis(const Corpus& corpus, const VenueCatalog& catalog,
                                              const std::string& venue, std::span<const int> pub_years,
                                              CutoffDate cutoff) {
  return five_year_window_analysis(PreparedVenue(corpus, catalog, venue), pub_years, cutoff);
}

inline TrajectorySeries trajectory_analysis(const Corpus& corpus, const VenueCatalog& catalog,
                                            const std::string& venue, int pub_year, CutoffDate cutoff,
                                            TrajectoryMode mode = TrajectoryMode::PerYear) {
  return trajectory_analysis(PreparedVenue(corpus, catalog, venue), pub_year, cutoff, mode);
}

inline RollingSeries rolling_analysis(const Corpus& corpus, const VenueCatalog& catalog, const std::string& venue,
                                      CutoffDate cutoff) {
  return rolling_analysis(PreparedVenue(corpus, catalog, venue), cutoff);
}

}  // namespace xindex
