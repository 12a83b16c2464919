#include "coedit/analytics.hpp"

#include "coedit/error.hpp"
#include "coedit/util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coedit {

std::optional<std::string> check_window_spec(const WindowSpec &spec) {
  if (spec.window_length <= 0 || spec.step <= 0)
    throw Error(ErrorKind::InvalidArgument, "window length and step must be positive");
  if (spec.step > spec.window_length)
    return "step exceeds window length; parts of the history fall between windows";
  return std::nullopt;
}

std::vector<Timestamp> window_starts(Timestamp first, Timestamp last, const WindowSpec &spec) {
  check_window_spec(spec);
  std::vector<Timestamp> starts;
  for (Timestamp t = first; t <= last; t += spec.step) starts.push_back(t);
  return starts;
}

std::optional<std::pair<Timestamp, Timestamp>> history_span(const Store &store) {
  auto commits = store.commits();
  if (commits.empty()) return std::nullopt;
  Timestamp lo = commits.front().meta.author_time, hi = lo;
  for (const auto &c : commits) {
    lo = std::min(lo, c.meta.author_time);
    hi = std::max(hi, c.meta.author_time);
  }
  return std::make_pair(lo, hi);
}

const char *to_string(Metric m) {
  switch (m) {
  case Metric::NumDevelopers: return "num_developers";
  case Metric::NumUniqueEdges: return "num_unique_edges";
  case Metric::MeanOutDegree: return "mean_out_degree";
  case Metric::DegreeCentralisation: return "degree_centralisation";
  }
  return "?";
}

Metric metric_from_string(const std::string &s) {
  for (auto m : {Metric::NumDevelopers, Metric::NumUniqueEdges, Metric::MeanOutDegree,
                 Metric::DegreeCentralisation})
    if (s == to_string(m)) return m;
  if (s == "degree_centralization") return Metric::DegreeCentralisation;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + s + "'");
}

std::optional<double> degree_centralisation(const StaticGraph &g) {
  auto u = undirected_collapse(g);
  const std::size_t n = u.nodes.size();
  if (n < 3) return std::nullopt;
  std::map<std::string, double> degree;
  for (const auto &v : u.nodes) degree[v] = 0;
  for (const auto &[key, w] : u.edges) {
    degree[key.first] += 1;
    degree[key.second] += 1;
  }
  double dmax = 0;
  for (const auto &[v, d] : degree) dmax = std::max(dmax, d);
  double sum = 0;
  for (const auto &[v, d] : degree) sum += dmax - d;
  return sum / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
}

std::optional<double> mean_out_degree(const StaticGraph &g) {
  if (g.nodes.empty()) return std::nullopt;
  return static_cast<double>(g.edge_count()) / static_cast<double>(g.nodes.size());
}

std::vector<TemporalEdge> topology_edges(const Store &store) {
  return temporal_coedit_edges(store, WeightMode::LineCount, false);
}

std::vector<MetricSeries> rolling_metrics(const Store &store, const WindowSpec &spec,
                                          const std::vector<Metric> &metrics) {
  check_window_spec(spec);
  std::vector<MetricSeries> out;
  for (auto m : metrics) out.push_back({to_string(m), {}, {}});
  auto span = history_span(store);
  if (!span) return out;
  auto edges = topology_edges(store);
  for (Timestamp start : window_starts(span->first, span->second, spec)) {
    auto g = aggregate_window(edges, start, spec.window_length);
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      std::optional<double> v;
      switch (metrics[i]) {
      case Metric::NumDevelopers: v = static_cast<double>(g.nodes.size()); break;
      case Metric::NumUniqueEdges: v = static_cast<double>(g.edge_count()); break;
      case Metric::MeanOutDegree: v = mean_out_degree(g); break;
      case Metric::DegreeCentralisation: v = degree_centralisation(g); break;
      }
      out[i].window_starts.push_back(start);
      out[i].values.push_back(v);
    }
  }
  return out;
}

DeltaCounts delta_counts(const Store &store, const TimeRange &range) {
  DeltaCounts d;
  d.m_f = coauthorship_graph(store, range).edge_count();
  auto edges = temporal_coedit_edges(store, WeightMode::LineCount, false, range);
  d.m_l = undirected_collapse(aggregate(edges)).edge_count();
  return d;
}

MetricSeries network_delta(const Store &store, const WindowSpec &spec) {
  check_window_spec(spec);
  MetricSeries s{"delta", {}, {}};
  auto span = history_span(store);
  if (!span) return s;
  auto mods = store.modifications();
  auto edges = topology_edges(store);
  for (Timestamp start : window_starts(span->first, span->second, spec)) {
    std::vector<ModificationRecord> in_window;
    for (const auto &m : mods)
      if (m.timestamp >= start && m.timestamp < start + spec.window_length) in_window.push_back(m);
    DeltaCounts d;
    d.m_f = coauthorship_graph(in_window).edge_count();
    d.m_l = undirected_collapse(aggregate_window(edges, start, spec.window_length)).edge_count();
    s.window_starts.push_back(start);
    s.values.push_back(d.delta());
  }
  return s;
}

std::vector<MetricSeries> OwnForeignSeries::as_series() const {
  MetricSeries count{"total_edit_count", window_starts, {}};
  MetricSeries weight{"total_weight", window_starts, {}};
  for (auto c : total_edit_count) count.values.push_back(static_cast<double>(c));
  for (auto w : total_weight) weight.values.push_back(w);
  return {count, weight, {"proportion_own", window_starts, proportion_own},
          {"proportion_foreign", window_starts, proportion_foreign}};
}

OwnForeignSeries own_foreign_split(const Store &store, const WindowSpec &spec, WeightMode mode) {
  check_window_spec(spec);
  OwnForeignSeries s;
  auto span = history_span(store);
  if (!span) return s;
  auto edges = temporal_coedit_edges(store, mode, true);
  for (Timestamp start : window_starts(span->first, span->second, spec)) {
    double own = 0, foreign = 0;
    std::size_t count = 0;
    for (const auto &e : edges) {
      if (e.timestamp < start || e.timestamp >= start + spec.window_length) continue;
      ++count;
      (e.source == e.target ? own : foreign) += e.weight;
    }
    s.window_starts.push_back(start);
    s.total_edit_count.push_back(count);
    s.total_weight.push_back(own + foreign);
    if (own + foreign > 0) {
      s.proportion_own.push_back(own / (own + foreign));
      s.proportion_foreign.push_back(foreign / (own + foreign));
    } else {
      s.proportion_own.push_back(std::nullopt);
      s.proportion_foreign.push_back(std::nullopt);
    }
  }
  return s;
}

std::string render_series_csv(const std::vector<MetricSeries> &series) {
  std::ostringstream out;
  out << "window_start";
  for (const auto &s : series) out << "," << csv_field(s.metric_name);
  out << "\n";
  if (series.empty()) return out.str();
  for (std::size_t i = 0; i < series.front().window_starts.size(); ++i) {
    out << series.front().window_starts[i];
    for (const auto &s : series) {
      out << ",";
      if (i < s.values.size() && s.values[i]) out << format_double(*s.values[i]);
    }
    out << "\n";
  }
  return out.str();
}

std::string render_series_html(const std::vector<MetricSeries> &series, const std::string &title) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << html_escape(title)
      << "</title><style>body{font-family:sans-serif}svg{border:1px solid #ddd;margin:8px}"
         "polyline{fill:none;stroke:#3b6ea5;stroke-width:2}</style></head><body>\n";
  const double W = 640, H = 220, pad = 36;
  for (const auto &s : series) {
    double lo = 0, hi = 0;
    bool any = false;
    for (const auto &v : s.values)
      if (v) {
        lo = any ? std::min(lo, *v) : *v;
        hi = any ? std::max(hi, *v) : *v;
        any = true;
      }
    if (hi == lo) hi = lo + 1;
    out << "<h3>" << html_escape(s.metric_name) << "</h3>\n<svg width=\"" << W << "\" height=\"" << H << "\">";
    out << "<text x=\"4\" y=\"14\" font-size=\"11\">" << format_double(hi) << "</text>";
    out << "<text x=\"4\" y=\"" << H - pad + 4 << "\" font-size=\"11\">" << format_double(lo)
        << "</text>";
    std::size_t n = s.values.size();
    // undefined values break the line into segments
    std::string points;
    auto flush = [&] {
      if (!points.empty()) out << "<polyline points=\"" << points << "\"/>";
      points.clear();
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!s.values[i]) {
        flush();
        continue;
      }
      double x = pad + (n > 1 ? (W - 2 * pad) * static_cast<double>(i) / static_cast<double>(n - 1) : 0);
      double y = H - pad - (H - 2 * pad) * (*s.values[i] - lo) / (hi - lo);
      points += format_double(std::round(x * 10) / 10) + "," + format_double(std::round(y * 10) / 10) + " ";
    }
    flush();
    if (n > 0) {
      out << "<text x=\"" << pad << "\" y=\"" << H - 8 << "\" font-size=\"11\">"
          << format_utc(s.window_starts.front()) << "</text>";
      out << "<text x=\"" << W - pad - 130 << "\" y=\"" << H - 8 << "\" font-size=\"11\">"
          << format_utc(s.window_starts.back()) << "</text>";
    }
    out << "</svg>\n";
  }
  out << "</body></html>\n";
  return out.str();
}

} // namespace coedit
