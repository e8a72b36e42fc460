#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xindex/analysis.hpp"
#include "xindex/catalog.hpp"
#include "xindex/citation.hpp"
#include "xindex/doi.hpp"
#include "xindex/manifest.hpp"
#include "xindex/report.hpp"
#include "xindex/ris.hpp"

namespace xindex {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Write-then-rename so readers never observe a half-written artifact.
inline void write_file_atomic(const fs::path& target, std::string_view content) {
  const auto tmp = target.parent_path() / (".tmp-" + target.filename().string());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot rename into " + target.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Ingest

struct IngestStats {
  std::size_t papers = 0;
  std::size_t ris_files = 0;
  std::size_t records = 0;
  std::size_t parse_warnings = 0;
  std::vector<std::string> missing;                        // DOIs without a RIS file
  std::vector<std::pair<std::string, std::string>> errors; // (file, message)
};

struct IngestResult {
  Corpus corpus;
  IngestStats stats;
};

inline fs::path ris_path_for(const fs::path& ris_dir, std::string_view doi) {
  return ris_dir / (doi_to_filename(doi) + ".ris");
}

/// Pairs every manifest DOI with `<ris_dir>/<doi_to_filename(doi)>.ris`, the
/// same naming the fetch cache uses. Missing or unparsable files leave the
/// paper with no citations and are listed in the stats.
inline IngestResult ingest(const CorpusManifest& manifest, const fs::path& ris_dir) {
  if (!fs::is_directory(ris_dir)) throw DataError("RIS directory not found: " + ris_dir.string());
  IngestResult out;
  for (auto& ref : manifest.papers()) {
    CitedPaper paper{ref, {}};
    ++out.stats.papers;
    const auto path = ris_path_for(ris_dir, ref.doi);
    if (!fs::exists(path)) {
      out.stats.missing.push_back(ref.doi);
      out.corpus.push_back(std::move(paper));
      continue;
    }
    ++out.stats.ris_files;
    try {
      auto parsed = ris::parse_stream(read_file(path));
      out.stats.parse_warnings += parsed.warnings.size();
      for (const auto& raw : parsed.records) paper.citations.push_back(to_citation_record(raw, ref));
      out.stats.records += paper.citations.size();
    } catch (const ParseError& e) {
      out.stats.errors.emplace_back(path.filename().string(), e.what());
    }
    out.corpus.push_back(std::move(paper));
  }
  return out;
}

inline json stats_to_json(const IngestStats& s) {
  json errors = json::array();
  for (const auto& [file, msg] : s.errors) errors.push_back({{"file", file}, {"error", msg}});
  return {{"papers", s.papers},       {"ris_files", s.ris_files}, {"records", s.records},
          {"parse_warnings", s.parse_warnings}, {"missing_ris", s.missing}, {"ris_errors", errors}};
}

inline IngestStats stats_from_json(const json& j) {
  IngestStats s;
  s.papers = j.value("papers", 0u);
  s.ris_files = j.value("ris_files", 0u);
  s.records = j.value("records", 0u);
  s.parse_warnings = j.value("parse_warnings", 0u);
  s.missing = j.value("missing_ris", std::vector<std::string>{});
  for (const auto& e : j.value("ris_errors", json::array()))
    s.errors.emplace_back(e.at("file").get<std::string>(), e.at("error").get<std::string>());
  return s;
}

/// Lossless JSON form of an ingested corpus, the hand-off between the
/// `ingest` and `analyze` stages.
inline json corpus_to_json(const IngestResult& in) {
  json papers = json::array();
  for (const auto& p : in.corpus) {
    json cites = json::array();
    for (const auto& c : p.citations) {
      json j = {{"source_strings", c.source_strings}};
      j["citing_doi"] = c.citing_doi ? json(*c.citing_doi) : json(nullptr);
      j["citation_year"] = c.citation_year ? json(*c.citation_year) : json(nullptr);
      j["title"] = c.title ? json(*c.title) : json(nullptr);
      cites.push_back(std::move(j));
    }
    papers.push_back({{"doi", p.ref.doi}, {"venue", p.ref.venue}, {"pub_year", p.ref.pub_year}, {"citations", cites}});
  }
  return {{"format", "xindex-corpus/1"}, {"papers", papers}, {"ingest", stats_to_json(in.stats)}};
}

inline IngestResult corpus_from_json(const json& j) {
  if (j.value("format", "") != "xindex-corpus/1") throw DataError("not an xindex corpus file");
  IngestResult out;
  for (const auto& p : j.at("papers")) {
    CitedPaper paper{{p.at("doi").get<std::string>(), p.at("venue").get<std::string>(), p.at("pub_year").get<int>()},
                     {}};
    for (const auto& c : p.at("citations")) {
      CitationRecord r;
      r.cited = paper.ref;
      r.source_strings = c.at("source_strings").get<std::vector<std::string>>();
      if (!c.at("citing_doi").is_null()) r.citing_doi = c.at("citing_doi").get<std::string>();
      if (!c.at("citation_year").is_null()) r.citation_year = c.at("citation_year").get<int>();
      if (!c.at("title").is_null()) r.title = c.at("title").get<std::string>();
      paper.citations.push_back(std::move(r));
    }
    out.corpus.push_back(std::move(paper));
  }
  if (j.contains("ingest")) out.stats = stats_from_json(j.at("ingest"));
  return out;
}

// ---------------------------------------------------------------------------
// Analyze and report

struct AnalyzeOptions {
  std::vector<std::string> venues;  // empty: every venue in the corpus
  std::set<Analysis> analyses{kAllAnalyses.begin(), kAllAnalyses.end()};
  CutoffDate cutoff{2023, 1};
  TrajectoryMode trajectory_mode = TrajectoryMode::PerYear;
  BootstrapOptions bootstrap;
};

/// Output file name -> content. Ordered, so writing is deterministic.
using Artifacts = std::map<std::string, std::string>;

inline std::string series_file(std::string_view venue, Analysis a, std::string_view ext) {
  return venue_file_stem(venue) + "_" + std::string(analysis_name(a)) + std::string(ext);
}

inline json tally_to_json(const ExclusionTally& t) {
  return {{"deduplicated", t.deduplicated},
          {"yearless", t.yearless},
          {"after_cutoff", t.after_cutoff},
          {"before_pub_year", t.before_pub}};
}

/// Runs the selected analyses and returns series CSVs plus `summary.json`.
/// Throws DataError if the corpus holds no citations at all.
inline Artifacts analyze(const IngestResult& input, const VenueCatalog& catalog, const AnalyzeOptions& opt) {
  std::size_t total = 0;
  for (const auto& p : input.corpus) total += p.citations.size();
  if (total == 0) throw DataError("no parsable citation records in the corpus");
  if (opt.analyses.empty()) throw UsageError("no analyses selected");

  std::vector<std::string> venues = opt.venues;
  if (venues.empty()) {
    std::set<std::string> all;
    for (const auto& p : input.corpus) all.insert(p.ref.venue);
    venues.assign(all.begin(), all.end());
  }

  Artifacts out;
  json per_venue = json::object();
  for (const auto& venue : venues) {
    PreparedVenue prepared(input.corpus, catalog, venue);
    const auto years = prepared.pub_years();

    const auto cohort = cohort_analysis(prepared, years, opt.cutoff);
    std::size_t used = 0;
    for (const auto& [_, p] : cohort.points) used += p.result.n_total;

    json v = {{"papers", prepared.papers().size()},
              {"parsed_records", prepared.parsed()},
              {"deduplicated", prepared.deduplicated()},
              {"used_cumulative", used},
              {"excluded_after_cutoff", cohort.tally.after_cutoff},
              {"yearless_in_cumulative", cohort.tally.yearless},
              {"before_pub_year_in_cumulative", cohort.tally.before_pub},
              {"pub_years", years}};
    json analyses = json::object();

    if (opt.analyses.contains(Analysis::Cohort)) {
      out[series_file(venue, Analysis::Cohort, ".csv")] = to_csv(cohort, opt.bootstrap);
      analyses["cohort"] = {{"points", cohort.points.size()}, {"excluded", tally_to_json(cohort.tally)}};
    }
    if (opt.analyses.contains(Analysis::Window)) {
      const auto window = five_year_window_analysis(prepared, years, opt.cutoff);
      out[series_file(venue, Analysis::Window, ".csv")] = to_csv(window, opt.bootstrap);
      analyses["window"] = {{"points", window.points.size()}, {"excluded", tally_to_json(window.tally)}};
    }
    if (opt.analyses.contains(Analysis::Trajectory)) {
      std::vector<TrajectorySeries> all;
      ExclusionTally t;
      t.deduplicated = prepared.deduplicated();
      for (int y : years) {
        all.push_back(trajectory_analysis(prepared, y, opt.cutoff, opt.trajectory_mode));
        t.yearless += all.back().tally.yearless;
        t.after_cutoff += all.back().tally.after_cutoff;
        t.before_pub += all.back().tally.before_pub;
      }
      out[series_file(venue, Analysis::Trajectory, ".csv")] = to_csv(all, opt.bootstrap);
      analyses["trajectory"] = {
          {"mode", opt.trajectory_mode == TrajectoryMode::PerYear ? "per_year" : "cumulative"},
          {"cohorts", all.size()},
          {"excluded", tally_to_json(t)}};
    }
    if (opt.analyses.contains(Analysis::Rolling)) {
      const auto rolling = rolling_analysis(prepared, opt.cutoff);
      out[series_file(venue, Analysis::Rolling, ".csv")] = to_csv(rolling, opt.bootstrap);
      analyses["rolling"] = {{"points", rolling.points.size()}, {"excluded", tally_to_json(rolling.tally)}};
    }
    v["analyses"] = std::move(analyses);
    per_venue[venue] = std::move(v);
  }

  std::vector<std::string> selected;
  for (auto a : kAllAnalyses)
    if (opt.analyses.contains(a)) selected.emplace_back(analysis_name(a));
  char cutoff[16];
  std::snprintf(cutoff, sizeof cutoff, "%04d-%02d", opt.cutoff.year, opt.cutoff.month);
  json summary = {{"catalog", {{"name", catalog.name()}, {"rules", catalog.size()}}},
                  {"cutoff", cutoff},
                  {"analyses", selected},
                  {"ingest", stats_to_json(input.stats)},
                  {"venues", per_venue}};
  if (opt.bootstrap.resamples > 0)
    summary["bootstrap"] = {{"resamples", opt.bootstrap.resamples},
                            {"confidence", opt.bootstrap.confidence},
                            {"seed", opt.bootstrap.seed}};
  out["summary.json"] = summary.dump(2) + "\n";
  return out;
}

/// SVG for every `<venue>_<analysis>.csv` among the artifacts. Tables with
/// no rows cannot be charted; their names go to `skipped` when given.
inline Artifacts render_charts(const Artifacts& csvs, std::vector<std::string>* skipped = nullptr) {
  Artifacts out;
  for (const auto& [name, content] : csvs) {
    if (!name.ends_with(".csv")) continue;
    const std::string stem = name.substr(0, name.size() - 4);
    const auto us = stem.rfind('_');
    if (us == std::string::npos) continue;
    const auto a = parse_analysis(stem.substr(us + 1));
    if (!a) continue;
    const std::string venue = stem.substr(0, us);
    const auto table = parse_series_csv(content);
    if (table.rows.empty()) {
      if (skipped) skipped->push_back(name);
      continue;
    }
    out[stem + ".svg"] = render_svg(chart_from(table, chart_title(venue, *a), venue));
  }
  return out;
}

/// Writes every artifact into `dir` (created if needed).
inline void write_artifacts(const fs::path& dir, const Artifacts& artifacts) {
  fs::create_directories(dir);
  for (const auto& [name, content] : artifacts) write_file_atomic(dir / name, content);
}

}  // namespace xindex
