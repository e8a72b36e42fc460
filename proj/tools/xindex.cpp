// xindex: command-line front end.
//
//   xindex ingest   --manifest M --ris-dir D --out corpus.json
//   xindex fetch    --manifest M --endpoint URL --cache-dir D
//   xindex analyze  --corpus corpus.json --catalog C --out DIR
//   xindex report   --in DIR
//   xindex run      --manifest M --ris-dir D --catalog C --out DIR
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 fetch error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xindex/fetcher.hpp"
#include "xindex/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kFetch = 3 };

struct AnalyzeFlags {
  std::string catalog;
  std::string cutoff = "2023-01";
  std::vector<std::string> venues;
  std::vector<std::string> analyses{"cohort", "window", "trajectory", "rolling"};
  std::string trajectory_mode = "per_year";
  std::size_t bootstrap = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 20230101;
  std::string out;
};

void add_analyze_flags(CLI::App* cmd, AnalyzeFlags& f) {
  cmd->add_option("--catalog", f.catalog, "Venue catalog CSV (acronym,identifier)")->required();
  cmd->add_option("--cutoff", f.cutoff, "Collection month, YYYY-MM")->capture_default_str();
  cmd->add_option("--venue", f.venues, "Venue acronym to analyze (repeatable; default: all)");
  cmd->add_option("--analysis", f.analyses, "cohort, window, trajectory, rolling (repeatable)")
      ->check(CLI::IsMember({"cohort", "window", "trajectory", "rolling"}))
      ->capture_default_str();
  cmd->add_option("--trajectory-mode", f.trajectory_mode, "per_year or cumulative")
      ->check(CLI::IsMember({"per_year", "cumulative"}))
      ->capture_default_str();
  cmd->add_option("--bootstrap", f.bootstrap, "Bootstrap resamples per point (0 disables intervals)")
      ->capture_default_str();
  cmd->add_option("--confidence", f.confidence, "Bootstrap interval confidence")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Bootstrap seed")->capture_default_str();
  cmd->add_option("--out", f.out, "Output directory")->required();
}

xindex::CutoffDate checked_cutoff(const std::string& text) {
  const auto cutoff = xindex::CutoffDate::parse(text);
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  const xindex::CutoffDate today{tm.tm_year + 1900, tm.tm_mon + 1};
  if (today < cutoff) throw xindex::UsageError("cutoff " + text + " is in the future");
  return cutoff;
}

xindex::AnalyzeOptions to_options(const AnalyzeFlags& f) {
  xindex::AnalyzeOptions o;
  o.venues = f.venues;
  o.analyses.clear();
  for (const auto& a : f.analyses) o.analyses.insert(*xindex::parse_analysis(a));
  o.cutoff = checked_cutoff(f.cutoff);
  o.trajectory_mode = f.trajectory_mode == "cumulative" ? xindex::TrajectoryMode::Cumulative
                                                        : xindex::TrajectoryMode::PerYear;
  o.bootstrap = {f.bootstrap, f.confidence, f.seed};
  return o;
}

xindex::VenueCatalog load_catalog_file(const fs::path& path) {
  if (!fs::exists(path)) throw xindex::DataError("catalog not found: " + path.string());
  auto load = xindex::load_catalog(xindex::read_file(path), path.stem().string());
  for (const auto& e : load.errors)
    std::cerr << "warning: " << path.string() << ":" << e.line << ": " << e.message << "\n";
  return std::move(load.catalog);
}

xindex::CorpusManifest load_manifest_file(const fs::path& path) {
  if (!fs::exists(path)) throw xindex::DataError("manifest not found: " + path.string());
  auto load = xindex::load_corpus_manifest(xindex::read_file(path));
  for (const auto& e : load.errors)
    std::cerr << "warning: " << path.string() << ":" << e.line << ": " << e.message << "\n";
  if (load.duplicates > 0)
    std::cerr << "warning: " << path.string() << ": " << load.duplicates << " duplicate DOI row(s) dropped\n";
  return std::move(load.manifest);
}

void report_ingest(const xindex::IngestStats& s) {
  if (!s.missing.empty()) std::cerr << "warning: " << s.missing.size() << " paper(s) have no RIS file\n";
  for (const auto& [file, msg] : s.errors) std::cerr << "warning: " << file << ": " << msg << "\n";
}

void print_written(const fs::path& dir, const xindex::Artifacts& a) {
  for (const auto& [name, _] : a) std::cout << (dir / name).string() << "\n";
}

xindex::Artifacts with_charts(xindex::Artifacts artifacts) {
  std::vector<std::string> skipped;
  auto charts = xindex::render_charts(artifacts, &skipped);
  for (const auto& s : skipped) std::cerr << "warning: " << s << " has no points; chart not drawn\n";
  artifacts.merge(charts);
  return artifacts;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const xindex::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const xindex::FetchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFetch;
  } catch (const xindex::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"X-index: share of citations from outside a field's venue catalog"};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  // ingest
  std::string manifest, ris_dir, corpus_out;
  auto* ingest = app.add_subcommand("ingest", "Parse RIS files for every manifest DOI into a corpus JSON");
  ingest->add_option("--manifest", manifest, "Manifest CSV (venue,year,doi)")->required();
  ingest->add_option("--ris-dir", ris_dir, "Directory of <doi>.ris files")->required();
  ingest->add_option("--out", corpus_out, "Corpus JSON to write")->required();

  // fetch
  xindex::FetchConfig fetch_cfg;
  std::string fetch_manifest, cache_dir;
  long rate_window_ms = 60'000, backoff_ms = 1'000, timeout_ms = 30'000;
  auto* fetch = app.add_subcommand("fetch", "Download citing-work RIS for every manifest DOI into the cache");
  fetch->add_option("--manifest", fetch_manifest, "Manifest CSV (venue,year,doi)")->required();
  fetch->add_option("--endpoint", fetch_cfg.endpoint, "URL template containing {doi}")->required();
  fetch->add_option("--cache-dir", cache_dir, "Cache directory (usable as --ris-dir later)")->required();
  fetch->add_option("--rate", fetch_cfg.max_requests_per_minute, "Max requests per rate window")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fetch->add_option("--rate-window-ms", rate_window_ms, "Rate window length in ms")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fetch->add_option("--retries", fetch_cfg.retry_limit, "Attempts per DOI")->check(CLI::PositiveNumber)->capture_default_str();
  fetch->add_option("--backoff-ms", backoff_ms, "Base delay between attempts")->capture_default_str();
  fetch->add_option("--timeout-ms", timeout_ms, "Connect/read timeout")->capture_default_str();
  fetch->add_option("--workers", fetch_cfg.workers, "Concurrent requests")->check(CLI::PositiveNumber)->capture_default_str();
  fetch->add_option("--auth-header", fetch_cfg.auth_header, "Header carrying the token")->capture_default_str();
  fetch->add_option("--auth-scheme", fetch_cfg.auth_scheme, "Token prefix, e.g. Bearer")->capture_default_str();

  // analyze
  AnalyzeFlags analyze_flags;
  std::string corpus_in;
  auto* analyze = app.add_subcommand("analyze", "Compute X-index series from a corpus JSON");
  analyze->add_option("--corpus", corpus_in, "Corpus JSON from `ingest`")->required();
  add_analyze_flags(analyze, analyze_flags);

  // report
  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Render SVG charts for series CSVs in a directory");
  report->add_option("--in", report_in, "Directory with <venue>_<analysis>.csv files")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "Where to write SVGs (default: --in)");

  // run
  AnalyzeFlags run_flags;
  std::string run_manifest, run_ris_dir;
  auto* run = app.add_subcommand("run", "ingest + analyze + report in one step");
  run->add_option("--manifest", run_manifest, "Manifest CSV (venue,year,doi)")->required();
  run->add_option("--ris-dir", run_ris_dir, "Directory of <doi>.ris files")->required();
  add_analyze_flags(run, run_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*ingest) {
    return guarded([&] {
      auto result = xindex::ingest(load_manifest_file(manifest), ris_dir);
      report_ingest(result.stats);
      const fs::path out(corpus_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      xindex::write_file_atomic(out, xindex::corpus_to_json(result).dump(1) + "\n");
      std::cout << result.stats.records << " citation records from " << result.stats.ris_files << " RIS file(s) -> "
                << out.string() << "\n";
      return kOk;
    });
  }

  if (*fetch) {
    return guarded([&] {
      fetch_cfg.cache_dir = cache_dir;
      fetch_cfg.rate_window = std::chrono::milliseconds(rate_window_ms);
      fetch_cfg.retry_backoff = std::chrono::milliseconds(backoff_ms);
      fetch_cfg.timeout = std::chrono::milliseconds(timeout_ms);
      if (const char* tok = std::getenv(std::string(xindex::kTokenEnvVar).c_str())) fetch_cfg.api_token = tok;
      const auto m = load_manifest_file(fetch_manifest);
      const auto r = xindex::fetch_corpus(m, fetch_cfg);
      std::cout << "requested " << r.requested << ", cached " << r.served_from_cache << ", fetched " << r.fetched
                << ", failed " << r.failed.size() << "\n";
      for (const auto& f : r.failed) std::cerr << "failed: " << f.doi << ": " << f.reason << "\n";
      return r.failed.empty() ? kOk : kFetch;
    });
  }

  if (*analyze) {
    return guarded([&] {
      const auto opts = to_options(analyze_flags);
      const auto catalog = load_catalog_file(analyze_flags.catalog);
      if (!fs::exists(corpus_in)) throw xindex::DataError("corpus not found: " + corpus_in);
      const auto corpus = xindex::corpus_from_json(nlohmann::json::parse(xindex::read_file(corpus_in)));
      const auto artifacts = xindex::analyze(corpus, catalog, opts);
      xindex::write_artifacts(analyze_flags.out, artifacts);
      print_written(analyze_flags.out, artifacts);
      return kOk;
    });
  }

  if (*report) {
    return guarded([&] {
      xindex::Artifacts csvs;
      for (const auto& entry : fs::directory_iterator(report_in))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
          csvs[entry.path().filename().string()] = xindex::read_file(entry.path());
      std::vector<std::string> skipped;
      const auto charts = xindex::render_charts(csvs, &skipped);
      for (const auto& s : skipped) std::cerr << "warning: " << s << " has no points; chart not drawn\n";
      if (charts.empty()) throw xindex::DataError("no chartable series CSVs in " + report_in);
      const fs::path out = report_out.empty() ? fs::path(report_in) : fs::path(report_out);
      xindex::write_artifacts(out, charts);
      print_written(out, charts);
      return kOk;
    });
  }

  if (*run) {
    return guarded([&] {
      const auto opts = to_options(run_flags);
      const auto catalog = load_catalog_file(run_flags.catalog);
      auto input = xindex::ingest(load_manifest_file(run_manifest), run_ris_dir);
      report_ingest(input.stats);
      // Everything is computed before the first write, so a failing run
      // leaves no partial output behind.
      const auto artifacts = with_charts(xindex::analyze(input, catalog, opts));
      xindex::write_artifacts(run_flags.out, artifacts);
      print_written(run_flags.out, artifacts);
      return kOk;
    });
  }
  return kUsage;
}
