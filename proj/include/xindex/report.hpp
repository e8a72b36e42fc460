#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xindex/analysis.hpp"
#include "xindex/csv.hpp"
#include "xindex/metric.hpp"

namespace xindex {

enum class Analysis { Cohort, Window, Trajectory, Rolling };

inline constexpr std::array<Analysis, 4> kAllAnalyses = {Analysis::Cohort, Analysis::Window, Analysis::Trajectory,
                                                         Analysis::Rolling};

inline std::string_view analysis_name(Analysis a) {
  switch (a) {
    case Analysis::Cohort: return "cohort";
    case Analysis::Window: return "window";
    case Analysis::Trajectory: return "trajectory";
    case Analysis::Rolling: return "rolling";
  }
  return "?";
}

inline std::optional<Analysis> parse_analysis(std::string_view s) {
  for (auto a : kAllAnalyses)
    if (analysis_name(a) == s) return a;
  return std::nullopt;
}

inline std::string chart_title(std::string_view venue, Analysis a) {
  std::string t(venue);
  switch (a) {
    case Analysis::Cohort: return t + ": X-index by publication year, all citations to cutoff";
    case Analysis::Window: return t + ": X-index by publication year, citations in first five years";
    case Analysis::Trajectory: return t + ": X-index by citation year, one line per publication year";
    case Analysis::Rolling: return t + ": X-index by citation year, papers from previous five years";
  }
  return t;
}

/// Venue acronym made safe for file names: anything outside [A-Za-z0-9.-]
/// becomes '_'.
inline std::string venue_file_stem(std::string_view venue) {
  std::string out;
  for (char c : venue) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "_" : out;
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string format_fixed(double v, int precision) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, p);
}

struct BootstrapOptions {
  std::size_t resamples = 0;  // 0 disables the interval columns
  double confidence = 0.95;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t point_seed(std::uint64_t seed, int k1, int k2) {
  SplitMix64 mix(seed ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k1)) << 32 |
                         static_cast<std::uint32_t>(k2)));
  return mix.next();
}

// Counts expanded to labels, InField first. The interval depends on the
// counts only, so this fixed order costs nothing.
inline std::vector<FieldLabel> labels_from(const XIndexResult& r) {
  std::vector<FieldLabel> labels(r.n_total, FieldLabel::OutOfField);
  std::fill_n(labels.begin(), r.n_infield, FieldLabel::InField);
  return labels;
}

inline void append_result_cells(std::vector<std::string>& row, const XIndexResult& r, const BootstrapOptions& bs,
                                int k1, int k2) {
  row.push_back(std::to_string(r.n_total));
  row.push_back(std::to_string(r.n_infield));
  auto v = r.value();
  row.push_back(v ? format_double(*v) : "");
  if (bs.resamples > 0) {
    if (v) {
      auto labels = labels_from(r);
      auto ci = bootstrap_interval(labels, bs.resamples, bs.confidence, point_seed(bs.seed, k1, k2));
      row.push_back(format_double(ci.low));
      row.push_back(format_double(ci.high));
    } else {
      row.emplace_back();
      row.emplace_back();
    }
  }
}

inline void append_header(std::vector<std::string>& header, const BootstrapOptions& bs) {
  for (auto h : {"n_total", "n_infield", "value"}) header.emplace_back(h);
  if (bs.resamples > 0) {
    header.emplace_back("ci_low");
    header.emplace_back("ci_high");
  }
}

}  // namespace detail

/// Header row, then one row per point in ascending key order. The `value`
/// cell is empty when no citation was pooled. Cohort files carry the
/// per-paper mean as a trailing auxiliary column.
inline std::string to_csv(const CohortSeries& s, const BootstrapOptions& bs = {}) {
  std::string out;
  std::vector<std::string> header{"pub_year"};
  detail::append_header(header, bs);
  header.emplace_back("papers");
  header.emplace_back("aux_mean_per_paper_x");
  csv::append_row(out, header);
  for (const auto& [year, p] : s.points) {
    std::vector<std::string> row{std::to_string(year)};
    detail::append_result_cells(row, p.result, bs, year, 0);
    row.push_back(std::to_string(p.papers));
    row.push_back(p.per_paper_mean ? format_double(*p.per_paper_mean) : "");
    csv::append_row(out, row);
  }
  return out;
}

inline std::string to_csv(const RollingSeries& s, const BootstrapOptions& bs = {}) {
  std::string out;
  std::vector<std::string> header{"citation_year"};
  detail::append_header(header, bs);
  csv::append_row(out, header);
  for (const auto& [year, r] : s.points) {
    std::vector<std::string> row{std::to_string(year)};
    detail::append_result_cells(row, r, bs, year, 0);
    csv::append_row(out, row);
  }
  return out;
}

/// All cohorts of one venue in one table, ordered by pub_year then
/// citation_year.
inline std::string to_csv(std::span<const TrajectorySeries> series, const BootstrapOptions& bs = {}) {
  std::string out;
  std::vector<std::string> header{"pub_year", "citation_year"};
  detail::append_header(header, bs);
  csv::append_row(out, header);
  std::vector<const TrajectorySeries*> sorted;
  for (const auto& s : series) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->pub_year < b->pub_year; });
  for (const auto* s : sorted)
    for (const auto& [year, r] : s->points) {
      std::vector<std::string> row{std::to_string(s->pub_year), std::to_string(year)};
      detail::append_result_cells(row, r, bs, s->pub_year, year);
      csv::append_row(out, row);
    }
  return out;
}

/// A series CSV read back: keys and counts per row.
struct SeriesTable {
  struct Row {
    std::optional<int> pub_year;
    std::optional<int> citation_year;
    XIndexResult result;
    std::optional<double> value;
  };
  bool has_pub_year = false;
  bool has_citation_year = false;
  std::vector<Row> rows;
};

inline SeriesTable parse_series_csv(std::string_view text) {
  auto rows = csv::parse(text, false);
  if (rows.empty()) throw DataError("series CSV has no header");
  const auto& header = rows.front().fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto pub = column("pub_year"), cit = column("citation_year");
  const auto total = column("n_total"), in = column("n_infield"), val = column("value");
  if (!total || !in || !val || (!pub && !cit)) throw DataError("not a series CSV: unexpected header");

  SeriesTable t;
  t.has_pub_year = pub.has_value();
  t.has_citation_year = cit.has_value();
  auto count = [](const std::string& s, std::size_t line) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad count '" + s + "'", line);
    return v;
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto line = rows[i].line;
    if (f.size() != header.size()) throw ParseError("row width differs from header", line);
    SeriesTable::Row r;
    if (pub) {
      r.pub_year = parse_int(f[*pub]);
      if (!r.pub_year) throw ParseError("bad pub_year", line);
    }
    if (cit) {
      r.citation_year = parse_int(f[*cit]);
      if (!r.citation_year) throw ParseError("bad citation_year", line);
    }
    r.result = {count(f[*total], line), count(f[*in], line)};
    if (r.result.n_infield > r.result.n_total) throw ParseError("n_infield exceeds n_total", line);
    if (!f[*val].empty()) {
      double v = 0;
      auto [p, ec] = std::from_chars(f[*val].data(), f[*val].data() + f[*val].size(), v);
      if (ec != std::errc{}) throw ParseError("bad value '" + f[*val] + "'", line);
      r.value = v;
    }
    t.rows.push_back(r);
  }
  return t;
}

// ---------------------------------------------------------------------------
// SVG line charts

struct ChartLine {
  std::string label;
  std::vector<std::pair<int, std::optional<double>>> points;  // x ascending
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label = "X-index";
  std::vector<ChartLine> lines;
};

inline Chart chart_from(const CohortSeries& s, std::string title) {
  ChartLine line{s.venue, {}};
  for (const auto& [y, p] : s.points) line.points.emplace_back(y, p.result.value());
  return {std::move(title), "publication year", "X-index", {std::move(line)}};
}

inline Chart chart_from(const RollingSeries& s, std::string title) {
  ChartLine line{s.venue, {}};
  for (const auto& [y, r] : s.points) line.points.emplace_back(y, r.value());
  return {std::move(title), "citation year", "X-index", {std::move(line)}};
}

inline Chart chart_from(std::span<const TrajectorySeries> series, std::string title) {
  Chart c{std::move(title), "citation year", "X-index", {}};
  for (const auto& s : series) {
    ChartLine line{std::to_string(s.pub_year), {}};
    for (const auto& [y, r] : s.points) line.points.emplace_back(y, r.value());
    c.lines.push_back(std::move(line));
  }
  std::stable_sort(c.lines.begin(), c.lines.end(), [](const ChartLine& a, const ChartLine& b) {
    return a.label < b.label;
  });
  return c;
}

/// Rebuilds a chart from a series CSV. Tables with both key columns become
/// one line per pub_year over citation_year.
inline Chart chart_from(const SeriesTable& t, std::string title, std::string line_label) {
  Chart c{std::move(title), t.has_citation_year ? "citation year" : "publication year", "X-index", {}};
  if (t.has_pub_year && t.has_citation_year) {
    std::map<int, ChartLine> by_pub;
    for (const auto& r : t.rows) {
      auto& line = by_pub[*r.pub_year];
      line.label = std::to_string(*r.pub_year);
      line.points.emplace_back(*r.citation_year, r.value);
    }
    for (auto& [_, l] : by_pub) c.lines.push_back(std::move(l));
  } else {
    ChartLine line{std::move(line_label), {}};
    for (const auto& r : t.rows) line.points.emplace_back(t.has_pub_year ? *r.pub_year : *r.citation_year, r.value);
    c.lines.push_back(std::move(line));
  }
  for (auto& l : c.lines)
    std::stable_sort(l.points.begin(), l.points.end(), [](auto& a, auto& b) { return a.first < b.first; });
  return c;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace chart_layout {
inline constexpr double kWidth = 720, kHeight = 440;
inline constexpr double kLeft = 64, kRight = 150, kTop = 48, kBottom = 56;
inline constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;
inline constexpr std::array<std::string_view, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
}  // namespace chart_layout

/// Line chart with years on x and the X-index, clamped to [0,1], on y
/// (screen y grows downward). Each run of consecutive present values is one
/// <polyline>; a run of length one has only its marker. Every present point
/// gets a <circle>. Output depends only on the chart contents.
inline std::string render_svg(const Chart& chart) {
  using namespace chart_layout;
  int x_min = 0, x_max = 0;
  bool any = false;
  for (const auto& l : chart.lines)
    for (const auto& [x, _] : l.points) {
      if (!any) x_min = x_max = x;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      any = true;
    }
  if (!any) throw DataError("cannot chart an empty series: " + chart.title);

  auto sx = [&](int x) {
    if (x_max == x_min) return kLeft + kPlotW / 2;
    return kLeft + kPlotW * static_cast<double>(x - x_min) / static_cast<double>(x_max - x_min);
  };
  auto sy = [&](double v) { return kTop + kPlotH * (1.0 - std::clamp(v, 0.0, 1.0)); };
  auto num = [](double v) { return format_fixed(v, 2); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text class=\"title\" x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       xml_escape(chart.title) + "</text>\n";

  o += "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n";
  o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" + num(kLeft + kPlotW) + "\" y2=\"" +
       num(kTop + kPlotH) + "\"/>\n";
  o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
       num(kTop + kPlotH) + "\"/>\n";
  o += "</g>\n";

  o += "<g class=\"yticks\" text-anchor=\"end\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0, y = sy(v);
    o += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft + kPlotW) + "\" y2=\"" +
         num(y) + "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) + "\">" + format_fixed(v, 1) + "</text>\n";
  }
  o += "</g>\n";

  const int span = x_max - x_min;
  const int step = span <= 12 ? 1 : (span + 11) / 12;
  o += "<g class=\"xticks\" text-anchor=\"middle\">\n";
  for (int x = x_min; x <= x_max; x += step) {
    o += "<line x1=\"" + num(sx(x)) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" + num(sx(x)) + "\" y2=\"" +
         num(kTop + kPlotH + 4) + "\" stroke=\"#333\"/>\n";
    o += "<text x=\"" + num(sx(x)) + "\" y=\"" + num(kTop + kPlotH + 18) + "\">" + std::to_string(x) + "</text>\n";
  }
  o += "</g>\n";
  o += "<text class=\"xlabel\" x=\"" + num(kLeft + kPlotW / 2) + "\" y=\"" + num(kHeight - 14) +
       "\" text-anchor=\"middle\">" + xml_escape(chart.x_label) + "</text>\n";
  o += "<text class=\"ylabel\" x=\"16\" y=\"" + num(kTop + kPlotH / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kTop + kPlotH / 2) + ")\">" + xml_escape(chart.y_label) + "</text>\n";

  for (std::size_t li = 0; li < chart.lines.size(); ++li) {
    const auto& line = chart.lines[li];
    const std::string color(kPalette[li % kPalette.size()]);
    o += "<g class=\"series\" data-label=\"" + xml_escape(line.label) + "\" stroke=\"" + color + "\" fill=\"" + color +
         "\">\n";
    std::vector<std::pair<double, double>> run;
    auto flush = [&] {
      if (run.size() >= 2) {
        o += "<polyline fill=\"none\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < run.size(); ++k)
          o += (k ? " " : "") + num(run[k].first) + "," + num(run[k].second);
        o += "\"/>\n";
      }
      run.clear();
    };
    for (const auto& [x, v] : line.points) {
      if (!v) {
        flush();
        continue;
      }
      run.emplace_back(sx(x), sy(*v));
    }
    flush();
    for (const auto& [x, v] : line.points)
      if (v) o += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(*v)) + "\" r=\"3\"/>\n";
    o += "</g>\n";

    const double ly = kTop + 8 + 16 * static_cast<double>(li);
    o += "<g class=\"legend\"><rect x=\"" + num(kLeft + kPlotW + 16) + "\" y=\"" + num(ly - 8) +
         "\" width=\"12\" height=\"8\" fill=\"" + color + "\"/><text x=\"" + num(kLeft + kPlotW + 34) + "\" y=\"" +
         num(ly) + "\">" + xml_escape(line.label) + "</text></g>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace xindex
