#pragma once

#include "coedit/networks.hpp"
#include "coedit/store.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coedit {

struct WindowSpec {
  Timestamp window_length = 365 * 86400;
  Timestamp step = 30 * 86400;
};

/// Throws for non-positive lengths; returns a warning text when step exceeds
/// the window length (windows then leave gaps).
std::optional<std::string> check_window_spec(const WindowSpec &spec);

/// Window starts anchored at `first`, stepping by spec.step up to and
/// including the window that contains `last`.
std::vector<Timestamp> window_starts(Timestamp first, Timestamp last, const WindowSpec &spec);

/// [first, last] author times of the stored commits; nullopt for an empty store.
std::optional<std::pair<Timestamp, Timestamp>> history_span(const Store &store);

struct MetricSeries {
  std::string metric_name;
  std::vector<Timestamp> window_starts;
  std::vector<std::optional<double>> values; // nullopt = undefined
};

enum class Metric { NumDevelopers, NumUniqueEdges, MeanOutDegree, DegreeCentralisation };

const char *to_string(Metric m);
Metric metric_from_string(const std::string &s);

/// Freeman centralisation on the undirected collapse:
/// sum_i (d_max - d_i) / ((n-1)(n-2)); undefined for n < 3.
std::optional<double> degree_centralisation(const StaticGraph &g);

/// edges / nodes; undefined for an empty graph.
std::optional<double> mean_out_degree(const StaticGraph &g);

/// Co-edit topology uses replacement and deletion edits (line-count weights)
/// with self-loops removed.
std::vector<TemporalEdge> topology_edges(const Store &store);

std::vector<MetricSeries> rolling_metrics(const Store &store, const WindowSpec &spec,
                                          const std::vector<Metric> &metrics);

struct DeltaCounts {
  std::size_t m_f = 0; // co-authorship links
  std::size_t m_l = 0; // undirected co-editing links
  std::optional<double> delta() const {
    if (m_l == 0) return std::nullopt;
    return static_cast<double>(m_f) / static_cast<double>(m_l);
  }
};

DeltaCounts delta_counts(const Store &store, const TimeRange &range = {});
MetricSeries network_delta(const Store &store, const WindowSpec &spec);

struct OwnForeignSeries {
  std::vector<Timestamp> window_starts;
  std::vector<std::size_t> total_edit_count;
  std::vector<double> total_weight;
  std::vector<std::optional<double>> proportion_own;
  std::vector<std::optional<double>> proportion_foreign;

  std::vector<MetricSeries> as_series() const;
};

OwnForeignSeries own_foreign_split(const Store &store, const WindowSpec &spec, WeightMode mode);

/// One row per window start; undefined values are empty cells.
std::string render_series_csv(const std::vector<MetricSeries> &series);
/// Standalone HTML page with one inline SVG line chart per series.
std::string render_series_html(const std::vector<MetricSeries> &series, const std::string &title);

} // namespace coedit
