#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "xindex/analysis.hpp"

namespace {

using namespace xindex;

const CutoffDate kJan2023{2023, 1};

struct Cite {
  std::optional<int> year;
  bool in;
  std::optional<std::string> doi = std::nullopt;
};

CitedPaper paper(const std::string& venue, int year, const std::string& doi, const std::vector<Cite>& cites) {
  CitedPaper p{{doi, venue, year}, {}};
  for (const auto& c : cites) {
    CitationRecord r;
    r.cited = p.ref;
    r.citation_year = c.year;
    r.citing_doi = c.doi;
    r.source_strings = {c.in ? "Proc. Human Factors in Computing Systems" : "Nature Communications"};
    p.citations.push_back(r);
  }
  return p;
}

std::vector<Cite> repeat(int n, std::optional<int> year, bool in) { return std::vector<Cite>(n, Cite{year, in}); }

std::vector<Cite> concat(std::vector<Cite> a, const std::vector<Cite>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const VenueCatalog kCatalog = xtest::test_catalog();

TEST(Cohort, SyntheticTwoYears) {
  Corpus c = {paper("CHI", 2010, "10.1/a", concat(repeat(3, 2012, false), repeat(1, 2013, true))),
              paper("CHI", 2011, "10.1/b", concat(repeat(1, 2012, false), repeat(3, 2014, true)))};
  const std::vector<int> years{2010, 2011};
  auto s = cohort_analysis(c, kCatalog, "CHI", years, kJan2023);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.points.at(2010).result.value(), 0.75);
  EXPECT_EQ(s.points.at(2011).result.value(), 0.25);
  EXPECT_EQ(s.points.at(2010).result, (XIndexResult{4, 1}));
}

TEST(Cohort, YearWithoutPapersIsAbsentAndSingleCitation) {
  Corpus c = {paper("CHI", 2010, "10.1/a", repeat(1, 2011, false))};
  const std::vector<int> years{2010, 2011};
  auto s = cohort_analysis(c, kCatalog, "CHI", years, kJan2023);
  EXPECT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points.at(2010).result.value(), 1.0);
}

TEST(Cohort, UnknownVenueNamesAvailable) {
  Corpus c = {paper("CHI", 2010, "10.1/a", {}), paper("UIST", 2010, "10.1/b", {})};
  const std::vector<int> years{2010};
  try {
    cohort_analysis(c, kCatalog, "CVPR", years, kJan2023);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("CHI, UIST"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cohort_analysis(c, kCatalog, "CHI", {}, kJan2023), UsageError);
}

TEST(Cohort, YearlessIncludedLaterThanCutoffExcluded) {
  Corpus c = {paper("CHI", 2015, "10.1/a", {{std::nullopt, true}, {2023, false}, {2024, false}, {2014, false}})};
  const std::vector<int> years{2015};
  auto s = cohort_analysis(c, kCatalog, "CHI", years, kJan2023);
  EXPECT_EQ(s.points.at(2015).result, (XIndexResult{3, 1}));
  EXPECT_EQ(s.tally.yearless, 1u);
  EXPECT_EQ(s.tally.after_cutoff, 1u);
  EXPECT_EQ(s.tally.before_pub, 1u);
}

TEST(Cohort, DuplicateCitingDoiCountsOnce) {
  Corpus c = {paper("CHI", 2015, "10.1/a",
                    {{2016, false, "10.9/x"}, {2016, false, "10.9/x"}, {2017, true}, {2017, true}})};
  const std::vector<int> years{2015};
  auto s = cohort_analysis(c, kCatalog, "CHI", years, kJan2023);
  EXPECT_EQ(s.points.at(2015).result, (XIndexResult{3, 2}));
  EXPECT_EQ(s.tally.deduplicated, 1u);
}

TEST(Window, WorkedExampleBoundaries) {
  Corpus c = {paper("CHI", 2015, "10.1/a", {{2015, false}, {2016, true}, {2020, false}, {2021, false}})};
  const std::vector<int> years{2015};
  auto s = five_year_window_analysis(c, kCatalog, "CHI", years, kJan2023);
  ASSERT_TRUE(s.points.contains(2015));
  EXPECT_EQ(s.points.at(2015).result, (XIndexResult{2, 1}));  // 2016 and 2020 only
}

TEST(Window, EligibilityWithJanuary2023Cutoff) {
  Corpus c;
  for (int y = 2010; y <= 2020; ++y) c.push_back(paper("CHI", y, "10.1/" + std::to_string(y), repeat(1, y + 1, false)));
  std::vector<int> years;
  for (int y = 2010; y <= 2020; ++y) years.push_back(y);
  auto s = five_year_window_analysis(c, kCatalog, "CHI", years, kJan2023);
  std::vector<int> got;
  for (const auto& [y, _] : s.points) got.push_back(y);
  EXPECT_EQ(got, (std::vector<int>{2010, 2011, 2012, 2013, 2014, 2015, 2016, 2017}));
}

TEST(Window, EmptyPoolKeepsYearWithAbsentValue) {
  Corpus c = {paper("CHI", 2012, "10.1/a", repeat(2, 2012, true))};
  const std::vector<int> years{2012};
  auto s = five_year_window_analysis(c, kCatalog, "CHI", years, kJan2023);
  ASSERT_TRUE(s.points.contains(2012));
  EXPECT_FALSE(s.points.at(2012).result.value());
}

TEST(Trajectory, PerYearPoints) {
  Corpus c = {paper("CSCW", 2013, "10.1/a", concat(repeat(2, 2019, false), repeat(3, 2019, true))),
              paper("CSCW", 2013, "10.1/b", repeat(1, 2013, false))};
  auto s = trajectory_analysis(c, kCatalog, "CSCW", 2013, kJan2023);
  EXPECT_EQ(s.points.at(2019).value(), 0.4);
  EXPECT_EQ(s.points.at(2013).value(), 1.0);
  EXPECT_FALSE(s.points.at(2016).value());
  EXPECT_EQ(s.points.begin()->first, 2013);
  EXPECT_EQ(s.points.rbegin()->first, 2023);
  EXPECT_THROW(trajectory_analysis(c, kCatalog, "CSCW", 2014, kJan2023), UsageError);
}

TEST(Trajectory, CumulativeModeIsRunningSum) {
  Corpus c = {paper("CHI", 2018, "10.1/a", concat(repeat(1, 2018, false), concat(repeat(1, 2019, true), repeat(2, 2021, false))))};
  auto per = trajectory_analysis(c, kCatalog, "CHI", 2018, kJan2023, TrajectoryMode::PerYear);
  auto cum = trajectory_analysis(c, kCatalog, "CHI", 2018, kJan2023, TrajectoryMode::Cumulative);
  XIndexResult running;
  for (const auto& [y, r] : per.points) {
    running += r;
    EXPECT_EQ(cum.points.at(y), running) << y;
  }
  EXPECT_EQ(cum.points.at(2023), (XIndexResult{4, 1}));
}

TEST(Trajectory, AnomaliesTallied) {
  Corpus c = {paper("CHI", 2018, "10.1/a", {{2016, true}, {std::nullopt, false}, {2019, false}})};
  auto s = trajectory_analysis(c, kCatalog, "CHI", 2018, kJan2023);
  EXPECT_EQ(s.tally.before_pub, 1u);
  EXPECT_EQ(s.tally.yearless, 1u);
  XIndexResult sum;
  for (const auto& [_, r] : s.points) sum += r;
  EXPECT_EQ(sum, (XIndexResult{1, 0}));
}

TEST(Rolling, StartsFiveYearsAfterEarliestPublication) {
  Corpus c;
  for (int y = 2010; y <= 2020; ++y)
    c.push_back(paper("UIST", y, "10.1/" + std::to_string(y), concat(repeat(1, 2015, false), repeat(1, 2016, true))));
  auto s = rolling_analysis(c, kCatalog, "UIST", kJan2023);
  EXPECT_EQ(s.points.begin()->first, 2015);
  EXPECT_EQ(s.points.rbegin()->first, 2022);
  // 2015: citations dated 2015 of papers 2010..2014 -> 5 out-of-field.
  EXPECT_EQ(s.points.at(2015), (XIndexResult{5, 0}));
  // 2016: papers 2011..2015 -> 5 in-field.
  EXPECT_EQ(s.points.at(2016), (XIndexResult{5, 5}));
  EXPECT_FALSE(s.points.at(2017).value());
}

TEST(Rolling, ShortSpanIsError) {
  Corpus c = {paper("UIST", 2010, "10.1/a", {}), paper("UIST", 2013, "10.1/b", {})};
  EXPECT_THROW(rolling_analysis(c, kCatalog, "UIST", kJan2023), DataError);
}

// --- properties over random corpora, checked against planted-label oracles

TEST(AnalysisProperty, WindowAndRollingAgreeWithNaiveFilter) {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    auto s = xtest::make_corpus(rng);
    for (const std::string venue : {"CHI", "UIST"}) {
      std::set<int> years;
      for (const auto& p : s.corpus)
        if (p.ref.venue == venue) years.insert(p.ref.pub_year);
      if (years.empty()) continue;
      const std::vector<int> yv(years.begin(), years.end());

      auto w = five_year_window_analysis(s.corpus, kCatalog, venue, yv, kJan2023);
      for (int y : yv) {
        if (y + 5 > 2022) {
          EXPECT_FALSE(w.points.contains(y));
          continue;
        }
        auto expect = xtest::oracle_count(s, [&](const std::string& v, int pub, std::optional<int> cy) {
          return v == venue && pub == y && cy && *cy >= y + 1 && *cy <= y + 5;
        });
        ASSERT_TRUE(w.points.contains(y));
        EXPECT_EQ(w.points.at(y).result, expect);
      }

      if (yv.back() - yv.front() + 1 < 5) {
        EXPECT_THROW(rolling_analysis(s.corpus, kCatalog, venue, kJan2023), DataError);
        continue;
      }
      auto r = rolling_analysis(s.corpus, kCatalog, venue, kJan2023);
      ASSERT_FALSE(r.points.empty());
      EXPECT_EQ(r.points.begin()->first, yv.front() + 5);
      for (const auto& [y, got] : r.points) {
        auto expect = xtest::oracle_count(s, [&](const std::string& v, int pub, std::optional<int> cy) {
          return v == venue && cy && *cy == y && pub >= y - 5 && pub <= y - 1;
        });
        EXPECT_EQ(got, expect) << venue << " " << y;
      }
    }
  }
}

TEST(AnalysisProperty, TrajectoryPartitionsCohort) {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 100; ++iter) {
    auto s = xtest::make_corpus(rng);
    PreparedVenue v(s.corpus, kCatalog, "CHI");
    const auto years = v.pub_years();
    auto cohort = cohort_analysis(v, years, kJan2023);
    for (int y : years) {
      auto t = trajectory_analysis(v, y, kJan2023);
      XIndexResult sum;
      for (const auto& [_, r] : t.points) sum += r;
      // Undated and pre-publication citations are in the cumulative pool but
      // have no trajectory year.
      auto leftover = xtest::oracle_count(s, [&](const std::string& vn, int pub, std::optional<int> cy) {
        return vn == "CHI" && pub == y && (!cy || *cy < pub);
      });
      sum += leftover;
      EXPECT_EQ(sum, cohort.points.at(y).result);
    }
  }
}

TEST(AnalysisProperty, PooledEqualsCountWeightedMeanOfPapers) {
  std::mt19937_64 rng(8);
  for (int iter = 0; iter < 100; ++iter) {
    auto s = xtest::make_corpus(rng);
    PreparedVenue v(s.corpus, kCatalog, "UIST");
    const auto years = v.pub_years();
    auto cohort = cohort_analysis(v, years, kJan2023);
    for (const auto& [y, point] : cohort.points) {
      if (!point.result.value()) continue;
      double weighted = 0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < s.corpus.size(); ++i) {
        const auto& p = s.corpus[i];
        if (p.ref.venue != "UIST" || p.ref.pub_year != y) continue;
        Corpus single = {p};
        const std::vector<int> yy{y};
        auto r = cohort_analysis(single, kCatalog, "UIST", yy, kJan2023).points.at(y).result;
        if (auto x = r.value()) {
          weighted += *x * static_cast<double>(r.n_total);
          n += r.n_total;
        }
      }
      EXPECT_EQ(n, point.result.n_total);
      EXPECT_NEAR(weighted / static_cast<double>(n), *point.result.value(), 1e-12);
    }
  }
}

TEST(AnalysisProperty, PermutationInvariance) {
  std::mt19937_64 rng(4);
  for (int iter = 0; iter < 50; ++iter) {
    auto s = xtest::make_corpus(rng, {.duplicate_rate = 0.0});
    auto shuffled = s.corpus;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto& p : shuffled) std::shuffle(p.citations.begin(), p.citations.end(), rng);
    for (const std::string venue : {"CHI", "UIST"}) {
      PreparedVenue a(s.corpus, kCatalog, venue), b(shuffled, kCatalog, venue);
      const auto years = a.pub_years();
      auto ca = cohort_analysis(a, years, kJan2023), cb = cohort_analysis(b, years, kJan2023);
      ASSERT_EQ(ca.points.size(), cb.points.size());
      for (const auto& [y, p] : ca.points) EXPECT_EQ(p.result, cb.points.at(y).result);
      auto wa = five_year_window_analysis(a, years, kJan2023), wb = five_year_window_analysis(b, years, kJan2023);
      for (const auto& [y, p] : wa.points) EXPECT_EQ(p.result, wb.points.at(y).result);
      if (years.back() - years.front() >= 4) {
        EXPECT_EQ(rolling_analysis(a, kJan2023).points, rolling_analysis(b, kJan2023).points);
      }
    }
  }
}

TEST(AnalysisProperty, AddingRulesNeverRaisesXIndex) {
  std::mt19937_64 rng(12);
  const VenueCatalog narrow("narrow", {make_rule("UIST", "User Interface Software and Technology")});
  for (int iter = 0; iter < 50; ++iter) {
    auto s = xtest::make_corpus(rng);
    PreparedVenue a(s.corpus, narrow, "CHI"), b(s.corpus, kCatalog, "CHI");
    const auto years = a.pub_years();
    auto ca = cohort_analysis(a, years, kJan2023), cb = cohort_analysis(b, years, kJan2023);
    for (const auto& [y, p] : ca.points) {
      const auto& q = cb.points.at(y).result;
      EXPECT_EQ(p.result.n_total, q.n_total);
      EXPECT_LE(p.result.n_infield, q.n_infield);
      if (p.result.value()) {
        EXPECT_LE(*q.value(), *p.result.value());
      }
    }
  }
}

TEST(AnalysisProperty, PlantedDecreasingTrendIsRecovered) {
  // Out-of-field share planted per year; exact counts, no sampling.
  Corpus c;
  const int out_share[] = {16, 14, 12, 10, 8, 6};  // of 20
  for (int k = 0; k < 6; ++k) {
    const int y = 2010 + k;
    for (int p = 0; p < 4; ++p) {
      std::vector<Cite> cites;
      for (int i = 0; i < 5; ++i) cites.push_back({y + 1 + (i % 3), p * 5 + i >= out_share[k]});
      c.push_back(paper("CHI", y, "10.1/" + std::to_string(y) + "." + std::to_string(p), cites));
    }
  }
  const std::vector<int> years{2010, 2011, 2012, 2013, 2014, 2015};
  auto s = cohort_analysis(c, kCatalog, "CHI", years, kJan2023);
  const double want[] = {0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
  for (int k = 0; k < 6; ++k) EXPECT_EQ(*s.points.at(2010 + k).result.value(), want[k]);
}

TEST(Cutoff, Parse) {
  EXPECT_EQ(CutoffDate::parse("2023-01"), (CutoffDate{2023, 1}));
  EXPECT_EQ(CutoffDate::parse("2023-01").last_complete_year(), 2022);
  EXPECT_THROW(CutoffDate::parse("2023-13"), UsageError);
  EXPECT_THROW(CutoffDate::parse("2023"), UsageError);
  EXPECT_THROW(CutoffDate::parse("Jan 2023"), UsageError);
}

}  // namespace
