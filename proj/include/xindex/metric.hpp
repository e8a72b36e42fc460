#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ranges>
#include <span>
#include <vector>

#include "xindex/catalog.hpp"
#include "xindex/error.hpp"

namespace xindex {

/// Pooled X-index of a citation set: the share of N citations that did not
/// come from the catalog venues.
struct XIndexResult {
  std::size_t n_total = 0;
  std::size_t n_infield = 0;

  /// (N - n)/N, the correctly rounded double of 1 - n/N. Absent when N == 0.
  std::optional<double> value() const {
    if (n_total == 0) return std::nullopt;
    return static_cast<double>(n_total - n_infield) / static_cast<double>(n_total);
  }

  XIndexResult& operator+=(const XIndexResult& o) {
    n_total += o.n_total;
    n_infield += o.n_infield;
    return *this;
  }
  friend XIndexResult operator+(XIndexResult a, const XIndexResult& b) { return a += b; }
  friend bool operator==(const XIndexResult&, const XIndexResult&) = default;
};

inline XIndexResult tally(FieldLabel label) {
  return {1, label == FieldLabel::InField ? std::size_t{1} : std::size_t{0}};
}

/// Counts over any range of FieldLabel. Citations are pooled, never
/// averaged per paper.
template <std::ranges::input_range R>
  requires std::same_as<std::ranges::range_value_t<R>, FieldLabel>
XIndexResult x_index(R&& labels) {
  XIndexResult r;
  for (FieldLabel l : labels) r += tally(l);
  return r;
}

inline XIndexResult x_index(std::initializer_list<FieldLabel> labels) {
  return x_index(std::span<const FieldLabel>(labels.begin(), labels.size()));
}

/// SplitMix64. Chosen over <random> engines + distributions because its
/// output and our index mapping are fully specified, so resamples can be
/// reproduced outside C++.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n) by rejection of the final partial block.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

private:
  std::uint64_t state_;
};

struct Interval {
  double low;
  double high;
};

/// Linear-interpolation percentile of a sorted sample (q in [0,1]).
inline double percentile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

/// Percentile bootstrap of the X-index. Each resample draws labels.size()
/// indices with replacement via SplitMix64(seed).below(n); bounds are the
/// (1-confidence)/2 and 1-(1-confidence)/2 linear-interpolated percentiles.
inline Interval bootstrap_interval(std::span<const FieldLabel> labels, std::size_t resamples, double confidence,
                                   std::uint64_t seed) {
  if (labels.empty()) throw DataError("bootstrap_interval: no labels to resample");
  if (resamples == 0) throw UsageError("bootstrap_interval: resamples must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw UsageError("bootstrap_interval: confidence must be in (0, 1)");

  SplitMix64 rng(seed);
  const std::size_t n = labels.size();
  std::vector<double> stats;
  stats.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    std::size_t in = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (labels[rng.below(n)] == FieldLabel::InField) ++in;
    stats.push_back(*XIndexResult{n, in}.value());
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - confidence) / 2.0;
  return {percentile_sorted(stats, alpha), percentile_sorted(stats, 1.0 - alpha)};
}

}  // namespace xindex
