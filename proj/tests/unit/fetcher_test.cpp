#include <chrono>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "xindex/fetcher.hpp"

namespace {

using namespace xindex;
using namespace std::chrono_literals;

std::string ris_body(int n, const std::string& tag) {
  std::string s;
  for (int i = 0; i < n; ++i)
    s += "TY  - JOUR\nTI  - " + tag + " " + std::to_string(i) + "\nT2  - Nature\nPY  - 2019\nER  - \n";
  return s;
}

CorpusManifest manifest_of(const std::vector<std::string>& dois) {
  CorpusManifest m;
  for (const auto& d : dois) m.entries[{"CHI", 2015}].push_back(d);
  return m;
}

FetchConfig config_for(const xtest::MockEndpoint& mock, const xtest::TempDir& dir) {
  FetchConfig c;
  c.endpoint = mock.url_template();
  c.cache_dir = dir / "cache";
  c.max_requests_per_minute = 1000;
  c.rate_window = 1000ms;
  c.retry_backoff = 1ms;
  c.timeout = 2000ms;
  return c;
}

TEST(RateLimiter, IntervalRoundsUp) {
  RateLimiter r(3, 10ms);
  EXPECT_GE(r.interval() * 3, std::chrono::steady_clock::duration(10ms));
}

TEST(RateLimiter, NeverExceedsMaxPerWindowAcrossThreads) {
  RateLimiter r(4, 200ms);
  std::mutex mu;
  std::vector<RateLimiter::Clock::time_point> starts;
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 4; ++t)
      pool.emplace_back([&] {
        for (int i = 0; i < 4; ++i) {
          const auto s = r.acquire();
          std::lock_guard lock(mu);
          starts.push_back(s);
        }
      });
  }
  ASSERT_EQ(starts.size(), 16u);
  EXPECT_LE(xtest::max_in_window(starts, 200ms), 4u);
}

TEST(DiskCache, PathsAreFilesystemSafe) {
  xtest::TempDir dir;
  DiskCache cache(dir.path());
  EXPECT_EQ(cache.body_path("10.1145/3290605.3300233").filename(), "10.1145%2F3290605.3300233.ris");
  EXPECT_FALSE(cache.contains("10.1/x"));
  cache.store("10.1/x", "", 200);
  EXPECT_TRUE(cache.contains("10.1/x"));
  EXPECT_EQ(cache.read("10.1/x"), std::string());
}

TEST(DiskCache, BodyWithoutOkSidecarIsNotAHit) {
  xtest::TempDir dir;
  DiskCache cache(dir.path());
  xtest::write_text(cache.body_path("10.1/x"), ris_body(1, "x"));
  EXPECT_FALSE(cache.contains("10.1/x"));
  xtest::write_text(cache.meta_path("10.1/x"), "{\"status\": \"partial\"}");
  EXPECT_FALSE(cache.contains("10.1/x"));
  xtest::write_text(cache.meta_path("10.1/x"), "{trunc");
  EXPECT_FALSE(cache.contains("10.1/x"));
}

TEST(Fetcher, FetchesParsesAndCaches) {
  xtest::MockEndpoint mock;
  mock.bodies["10.1/a"] = ris_body(3, "a");
  xtest::TempDir dir;
  CitationFetcher f(config_for(mock, dir));
  auto first = f.fetch("10.1/a");
  EXPECT_FALSE(first.from_cache);
  EXPECT_EQ(first.records.size(), 3u);
  auto second = f.fetch("10.1/a");
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.records.size(), 3u);
  EXPECT_EQ(mock.request_count(), 1u);
  EXPECT_EQ(mock.requested().front(), "10.1/a");
}

TEST(Fetcher, EmptyResultIsCachedToo) {
  xtest::MockEndpoint mock;
  xtest::TempDir dir;
  CitationFetcher f(config_for(mock, dir));
  EXPECT_TRUE(f.fetch("10.1/none").records.empty());
  EXPECT_TRUE(f.fetch("10.1/none").from_cache);
  EXPECT_EQ(mock.request_count(), 1u);
}

TEST(Fetcher, SendsTokenHeader) {
  xtest::MockEndpoint mock;
  xtest::TempDir dir;
  auto cfg = config_for(mock, dir);
  cfg.api_token = "s3cret";
  CitationFetcher(cfg).fetch("10.1/a");
  EXPECT_EQ(mock.auth_headers().at(0), "Bearer s3cret");
}

TEST(Fetcher, AuthRejectionStopsImmediately) {
  xtest::MockEndpoint mock;
  mock.reject_auth = true;
  xtest::TempDir dir;
  auto cfg = config_for(mock, dir);
  cfg.retry_limit = 5;
  CitationFetcher f(cfg);
  EXPECT_THROW(f.fetch("10.1/a"), AuthError);
  EXPECT_EQ(mock.request_count(), 1u);
  EXPECT_THROW(fetch_corpus(manifest_of({"10.1/a", "10.1/b", "10.1/c"}), f), AuthError);
}

TEST(Fetcher, RetriesServerErrorsUpToLimit) {
  xtest::MockEndpoint mock;
  mock.failing.insert("10.1/bad");
  xtest::TempDir dir;
  auto cfg = config_for(mock, dir);
  cfg.retry_limit = 3;
  CitationFetcher f(cfg);
  EXPECT_THROW(f.fetch("10.1/bad"), FetchError);
  EXPECT_EQ(mock.request_count(), 3u);
  EXPECT_FALSE(f.cache().contains("10.1/bad"));
}

TEST(Fetcher, NotFoundIsNotRetried) {
  int calls = 0;
  xtest::TempDir dir;
  FetchConfig cfg;
  cfg.endpoint = "http://unused/{doi}";
  cfg.cache_dir = dir / "c";
  cfg.retry_backoff = 1ms;
  CitationFetcher f(cfg, [&](const std::string&, const httplib::Headers&, std::chrono::milliseconds) {
    ++calls;
    return HttpResponse{404, {}, {}};
  });
  EXPECT_THROW(f.fetch("10.1/a"), FetchError);
  EXPECT_EQ(calls, 1);
}

TEST(Fetcher, TransportFailureIsFetchError) {
  xtest::TempDir dir;
  FetchConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/{doi}";
  cfg.cache_dir = dir / "c";
  cfg.retry_limit = 2;
  cfg.retry_backoff = 1ms;
  cfg.timeout = 500ms;
  EXPECT_THROW(fetch_citations("10.1/a", cfg), FetchError);
}

TEST(Fetcher, InvalidConfigIsUsageError) {
  xtest::TempDir dir;
  FetchConfig cfg;
  cfg.cache_dir = dir.path();
  cfg.endpoint = "http://x/no-placeholder";
  EXPECT_THROW(CitationFetcher{cfg}, UsageError);
  cfg.endpoint = "http://x/{doi}";
  cfg.max_requests_per_minute = 0;
  EXPECT_THROW(CitationFetcher{cfg}, UsageError);
}

TEST(FetchCorpus, FailureIsIsolatedAndRerunFetchesNothing) {
  xtest::MockEndpoint mock;
  mock.bodies["10.1/a"] = ris_body(2, "a");
  mock.bodies["10.1/c"] = ris_body(1, "c");
  mock.failing.insert("10.1/b");
  xtest::TempDir dir;
  auto cfg = config_for(mock, dir);
  cfg.retry_limit = 2;
  const auto m = manifest_of({"10.1/a", "10.1/b", "10.1/c"});

  auto r1 = fetch_corpus(m, cfg);
  EXPECT_EQ(r1.requested, 3u);
  EXPECT_EQ(r1.fetched, 2u);
  ASSERT_EQ(r1.failed.size(), 1u);
  EXPECT_EQ(r1.failed[0].doi, "10.1/b");

  mock.failing.clear();
  const auto before = mock.request_count();
  auto r2 = fetch_corpus(m, cfg);
  EXPECT_EQ(r2.served_from_cache, 2u);
  EXPECT_EQ(r2.fetched, 1u);
  EXPECT_TRUE(r2.failed.empty());
  EXPECT_EQ(mock.request_count() - before, 1u);

  auto r3 = fetch_corpus(m, cfg);
  EXPECT_EQ(r3.served_from_cache, 3u);
  EXPECT_EQ(mock.request_count() - before, 1u);
}

TEST(FetchCorpus, EmptyManifest) {
  xtest::MockEndpoint mock;
  xtest::TempDir dir;
  auto r = fetch_corpus(CorpusManifest{}, config_for(mock, dir));
  EXPECT_EQ(r.requested, 0u);
  EXPECT_EQ(r.served_from_cache + r.fetched + r.failed.size(), 0u);
  EXPECT_EQ(mock.request_count(), 0u);
}

TEST(FetchCorpus, DuplicateDoisRequestedOnce) {
  xtest::MockEndpoint mock;
  xtest::TempDir dir;
  CorpusManifest m;
  m.entries[{"CHI", 2015}] = {"10.1/a", "10.1/b"};
  m.entries[{"UIST", 2015}] = {"10.1/a"};
  auto r = fetch_corpus(m, config_for(mock, dir));
  EXPECT_EQ(r.requested, 2u);
  EXPECT_EQ(mock.request_count(), 2u);
}

TEST(FetchCorpus, PacingHoldsWithConcurrentWorkers) {
  xtest::MockEndpoint mock;
  xtest::TempDir dir;
  auto cfg = config_for(mock, dir);
  cfg.max_requests_per_minute = 5;
  cfg.rate_window = 300ms;
  cfg.workers = 4;

  std::mutex mu;
  std::vector<std::chrono::steady_clock::time_point> sent;
  CitationFetcher f(cfg, [&](const std::string& url, const httplib::Headers& h, std::chrono::milliseconds t) {
    {
      std::lock_guard lock(mu);
      sent.push_back(std::chrono::steady_clock::now());
    }
    return httplib_get(url, h, t);
  });
  std::vector<std::string> dois;
  for (int i = 0; i < 16; ++i) dois.push_back("10.1/p" + std::to_string(i));
  auto r = fetch_corpus(manifest_of(dois), f);
  EXPECT_EQ(r.fetched, 16u);
  // Observed timestamps lag the limiter's slots by scheduling jitter.
  EXPECT_LE(xtest::max_in_window(sent, 285ms), 5u);
  EXPECT_LE(xtest::max_in_window(mock.arrivals(), 285ms), 5u);
}

}  // namespace
