#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "xindex/doi.hpp"
#include "xindex/error.hpp"
#include "xindex/manifest.hpp"
#include "xindex/ris.hpp"

namespace xindex {

namespace fs = std::filesystem;

inline constexpr std::string_view kTokenEnvVar = "XINDEX_API_TOKEN";

struct FetchConfig {
  /// URL template; "{doi}" is replaced by the percent-encoded DOI, e.g.
  /// "https://api.example.org/citations?doi={doi}".
  std::string endpoint;
  std::string auth_header = "Authorization";
  std::string auth_scheme = "Bearer";  // empty: send the bare token
  std::string api_token;
  unsigned max_requests_per_minute = 60;
  /// Length of the rate window. One minute outside of tests.
  std::chrono::milliseconds rate_window{60'000};
  fs::path cache_dir;
  unsigned retry_limit = 3;  // total attempts per DOI
  std::chrono::milliseconds retry_backoff{1'000};
  std::chrono::milliseconds timeout{30'000};
  unsigned workers = 1;

  void validate() const {
    if (endpoint.find("{doi}") == std::string::npos) throw UsageError("endpoint must contain '{doi}': " + endpoint);
    if (max_requests_per_minute == 0) throw UsageError("max_requests_per_minute must be positive");
    if (rate_window.count() <= 0) throw UsageError("rate window must be positive");
    if (retry_limit == 0) throw UsageError("retry_limit must be at least 1");
    if (workers == 0) throw UsageError("workers must be at least 1");
    if (cache_dir.empty()) throw UsageError("cache_dir is required");
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    if (ec || !fs::is_directory(cache_dir)) throw UsageError("cache_dir not usable: " + cache_dir.string());
    if (::access(cache_dir.c_str(), W_OK) != 0) throw UsageError("cache_dir not writable: " + cache_dir.string());
  }
};

struct FetchFailure {
  std::string doi;
  std::string reason;
};

struct FetchReport {
  std::size_t requested = 0;
  std::size_t served_from_cache = 0;
  std::size_t fetched = 0;
  std::vector<FetchFailure> failed;
};

/// Spaces request starts at least window/max apart, across all threads. Any
/// half-open window of length `window` therefore holds at most `max` starts.
/// A start is granted against the clock as read after waking, so sleep
/// overshoot delays later requests instead of bunching them up.
class RateLimiter {
public:
  using Clock = std::chrono::steady_clock;

  RateLimiter(unsigned max_per_window, std::chrono::milliseconds window)
      : interval_(ceil_div(std::chrono::duration_cast<Clock::duration>(window), max_per_window)) {}

  /// Blocks until the caller may start a request; returns the start time.
  Clock::time_point acquire() {
    std::unique_lock lock(mu_);
    for (;;) {
      const auto now = Clock::now();
      if (!started_ || now >= last_ + interval_) {
        started_ = true;
        last_ = now;
        return now;
      }
      const auto wake = last_ + interval_;
      lock.unlock();
      std::this_thread::sleep_until(wake);
      lock.lock();
    }
  }

  Clock::duration interval() const noexcept { return interval_; }

private:
  static Clock::duration ceil_div(Clock::duration d, unsigned n) {
    return Clock::duration((d.count() + n - 1) / n);
  }

  Clock::duration interval_;
  std::mutex mu_;
  bool started_ = false;
  Clock::time_point last_{};
};

/// Verbatim response bodies, one file per DOI, plus a JSON sidecar.
///
///     <cache_dir>/<doi_to_filename(doi)>.ris
///     <cache_dir>/<doi_to_filename(doi)>.meta.json
///
/// Both files are written to a temporary name and renamed into place, body
/// first. An entry counts only once its sidecar says status "ok", so a
/// process killed mid-write leaves nothing that looks cached.
class DiskCache {
public:
  explicit DiskCache(fs::path dir) : dir_(std::move(dir)) {}

  fs::path body_path(std::string_view doi) const { return dir_ / (doi_to_filename(doi) + ".ris"); }
  fs::path meta_path(std::string_view doi) const { return dir_ / (doi_to_filename(doi) + ".meta.json"); }

  bool contains(std::string_view doi) const {
    std::ifstream in(meta_path(doi));
    if (!in || !fs::exists(body_path(doi))) return false;
    auto meta = nlohmann::json::parse(in, nullptr, false);
    return !meta.is_discarded() && meta.value("status", "") == "ok";
  }

  std::optional<std::string> read(std::string_view doi) const {
    if (!contains(doi)) return std::nullopt;
    std::ifstream in(body_path(doi), std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  void store(std::string_view doi, std::string_view body, int http_status) const {
    write_atomic(body_path(doi), body);
    nlohmann::json meta = {
        {"doi", std::string(doi)},
        {"status", "ok"},
        {"http_status", http_status},
        {"bytes", body.size()},
        {"fetched_at", utc_timestamp()},
    };
    write_atomic(meta_path(doi), meta.dump(2) + "\n");
  }

  const fs::path& dir() const noexcept { return dir_; }

  static void write_atomic(const fs::path& target, std::string_view content) {
    static std::atomic<std::uint64_t> counter{0};
    const auto tmp = target.parent_path() / (".tmp-" + std::to_string(::getpid()) + "-" +
                                              std::to_string(counter.fetch_add(1)) + "-" +
                                              target.filename().string());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp.string());
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.flush();
      if (!out) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw Error("cannot rename into " + target.string());
    }
  }

private:
  static std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  fs::path dir_;
};

inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
        c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

struct HttpResponse {
  int status = 0;  // 0: transport failure
  std::string body;
  std::string error;
};

/// One GET per call. Swappable so that callers can route requests elsewhere.
using HttpGet = std::function<HttpResponse(const std::string& url, const httplib::Headers& headers,
                                           std::chrono::milliseconds timeout)>;

inline HttpResponse httplib_get(const std::string& url, const httplib::Headers& headers,
                                std::chrono::milliseconds timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, {}, "endpoint is not an absolute URL: " + url};
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) path_start = url.size();
  httplib::Client client(url.substr(0, path_start));
  if (!client.is_valid()) return {0, {}, "unsupported endpoint: " + url};
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  const std::string path = path_start < url.size() ? url.substr(path_start) : "/";
  auto res = client.Get(path, headers);
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

/// Retrieves citing-work records per DOI through the cache, pacing network
/// requests with one shared RateLimiter. Safe to call from several threads
/// for distinct DOIs.
class CitationFetcher {
public:
  explicit CitationFetcher(FetchConfig config, HttpGet get = httplib_get)
      : config_((config.validate(), std::move(config))),
        cache_(config_.cache_dir),
        limiter_(config_.max_requests_per_minute, config_.rate_window),
        get_(std::move(get)) {}

  struct Outcome {
    std::vector<ris::RawRecord> records;
    bool from_cache = false;
  };

  /// Cached body if present, else a paced remote request whose body is cached
  /// before it is parsed. Throws AuthError on 401/403, FetchError once
  /// retry_limit attempts have failed, ParseError if the body is not RIS.
  Outcome fetch(std::string_view doi) {
    if (auto body = cache_.read(doi)) return {ris::parse_stream(*body).records, true};

    std::string url = config_.endpoint;
    const auto pos = url.find("{doi}");
    url.replace(pos, 5, percent_encode(doi));
    httplib::Headers headers;
    if (!config_.api_token.empty())
      headers.emplace(config_.auth_header,
                      config_.auth_scheme.empty() ? config_.api_token : config_.auth_scheme + " " + config_.api_token);
    headers.emplace("Accept", "application/x-research-info-systems, text/plain");

    std::string last_error;
    for (unsigned attempt = 1; attempt <= config_.retry_limit; ++attempt) {
      if (attempt > 1) std::this_thread::sleep_for(config_.retry_backoff * (attempt - 1));
      limiter_.acquire();
      const auto res = get_(url, headers, config_.timeout);
      if (res.status == 200) {
        cache_.store(doi, res.body, res.status);
        return {ris::parse_stream(res.body).records, false};
      }
      if (res.status == 401 || res.status == 403)
        throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res.status) + ")");
      last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
      const bool retryable = res.status == 0 || res.status == 408 || res.status == 429 || res.status >= 500;
      if (!retryable) break;
    }
    throw FetchError(last_error);
  }

  const FetchConfig& config() const noexcept { return config_; }
  const DiskCache& cache() const noexcept { return cache_; }

private:
  FetchConfig config_;
  DiskCache cache_;
  RateLimiter limiter_;
  HttpGet get_;
};

inline std::vector<ris::RawRecord> fetch_citations(std::string_view doi, const FetchConfig& config) {
  CitationFetcher fetcher(config);
  return fetcher.fetch(doi).records;
}

/// Fetches every distinct DOI of the manifest, skipping cached ones. Per-DOI
/// failures are collected; an AuthError stops the batch and propagates.
inline FetchReport fetch_corpus(const CorpusManifest& manifest, CitationFetcher& fetcher) {
  std::vector<std::string> dois;
  {
    std::set<std::string> seen;
    for (const auto& [_, cell] : manifest.entries)
      for (const auto& d : cell)
        if (seen.insert(d).second) dois.push_back(d);
  }

  enum class State { Pending, Cached, Fetched, Failed };
  std::vector<State> state(dois.size(), State::Pending);
  std::vector<std::string> reason(dois.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr auth_error;
  std::mutex err_mu;

  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= dois.size()) return;
      try {
        state[i] = fetcher.fetch(dois[i]).from_cache ? State::Cached : State::Fetched;
      } catch (const AuthError&) {
        std::lock_guard lock(err_mu);
        if (!auth_error) auth_error = std::current_exception();
        abort = true;
        return;
      } catch (const std::exception& e) {
        state[i] = State::Failed;
        reason[i] = e.what();
      }
    }
  };

  const unsigned n_workers = std::max(1u, std::min<unsigned>(fetcher.config().workers, dois.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (auth_error) std::rethrow_exception(auth_error);

  FetchReport report;
  report.requested = dois.size();
  for (std::size_t i = 0; i < dois.size(); ++i) {
    switch (state[i]) {
      case State::Cached: ++report.served_from_cache; break;
      case State::Fetched: ++report.fetched; break;
      case State::Failed: report.failed.push_back({dois[i], reason[i]}); break;
      case State::Pending: report.failed.push_back({dois[i], "not attempted"}); break;
    }
  }
  return report;
}

inline FetchReport fetch_corpus(const CorpusManifest& manifest, const FetchConfig& config) {
  CitationFetcher fetcher(config);
  return fetch_corpus(manifest, fetcher);
}

}  // namespace xindex
