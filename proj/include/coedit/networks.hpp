#pragma once

#include "coedit/repo_access.hpp"
#include "coedit/store.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace coedit {

enum class WeightMode { Levenshtein, LineCount };

const char *to_string(WeightMode m);
WeightMode weight_mode_from_string(const std::string &s);

struct TemporalEdge {
  std::string source; // modifying author
  std::string target; // original author
  Timestamp timestamp = 0;
  double weight = 0.0;
  std::string file;
  std::string modifying_commit;

  bool operator==(const TemporalEdge &) const = default;
};

/// True for records that represent one developer changing another's code:
/// replacements, and deletions that are not lines discarded by a merge.
bool is_coedit(const EditRecord &r, WeightMode mode);
double coedit_weight(const EditRecord &r, WeightMode mode);

std::vector<TemporalEdge> coedit_edges(const std::vector<EditRecord> &records, WeightMode mode,
                                       bool include_self_loops);

std::vector<TemporalEdge> temporal_coedit_edges(const Store &store, WeightMode mode,
                                                bool include_self_loops,
                                                const TimeRange &range = {});

struct StaticGraph {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, double> edges;
  bool directed = true;

  /// For undirected graphs the pair is stored in sorted order.
  void add_edge(const std::string &a, const std::string &b, double weight);
  bool has_edge(const std::string &a, const std::string &b) const;
  std::size_t edge_count() const { return edges.size(); }
  bool operator==(const StaticGraph &) const = default;
};

StaticGraph aggregate(const std::vector<TemporalEdge> &edges);

/// Edges with window_start <= t < window_start + window_length.
StaticGraph aggregate_window(const std::vector<TemporalEdge> &edges, Timestamp window_start,
                             Timestamp window_length);

/// Merges (a,b) and (b,a); weights add up. Self-loops are dropped.
StaticGraph undirected_collapse(const StaticGraph &g);

StaticGraph bipartite_graph(const std::vector<ModificationRecord> &modifications);
StaticGraph bipartite_graph(const Store &store, const TimeRange &range = {});

StaticGraph coauthorship_graph(const std::vector<ModificationRecord> &modifications);
StaticGraph coauthorship_graph(const Store &store, const TimeRange &range = {});

struct CommitDag {
  std::string file;
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;

  std::set<std::string> roots() const;
  std::set<std::string> leaves() const;
  std::set<std::string> intermediates() const;
};

/// Throws Error(CycleDetected) when an edge does not point forward in the
/// stored commit order.
CommitDag commit_dag(const Store &store, const std::string &file);

/// Every path that occurs in the store's edit records.
std::set<std::string> edited_files(const Store &store);

enum class LineNodeKind { Original, Edit, Move, CopyIn, DeletionSentinel };

const char *to_string(LineNodeKind k);

struct LineEditNode {
  std::string id;
  std::string commit;
  std::string path;
  int line = 0; // line in the commit's version; for sentinels, the deleted pre-image line
  std::string line_instance;
  LineNodeKind kind = LineNodeKind::Original;
  std::string author;
  Timestamp timestamp = 0;
};

struct LineEditDag {
  std::vector<LineEditNode> nodes; // sorted by (timestamp, id)
  std::set<std::pair<std::string, std::string>> edges;
  // source line version -> copy_in root; the source may live in another DAG
  std::set<std::pair<std::string, std::string>> copy_links;

  const LineEditNode *node(const std::string &id) const;
  std::vector<std::string> roots() const;
  std::vector<std::string> leaves() const;
};

/// Requires a line-granularity store. When the history contains merges the
/// store must have been mined with merge extraction (MissingMergeRecords).
std::vector<LineEditDag> line_editing_dag(const RepositoryHandle &repo, const Store &store,
                                          const std::string &file, bool detect_moves,
                                          bool detect_copies);

/// Generic adjacency-list form used by path enumeration.
struct Digraph {
  std::vector<std::string> ids;       // node ids
  std::vector<Timestamp> timestamps;  // aligned with ids
  std::vector<std::vector<int>> succ; // successor indices
};

Digraph to_digraph(const LineEditDag &dag);

/// All maximal root-to-leaf paths, ordered by (root timestamp, node ids).
/// Throws Error(CycleDetected) on a cycle.
std::vector<std::vector<std::string>> enumerate_paths(const Digraph &g);
std::vector<std::vector<std::string>> enumerate_paths(const std::vector<LineEditDag> &dags);

// ---- export ---------------------------------------------------------------

struct EdgeRow {
  std::string source;
  std::string target;
  std::optional<Timestamp> timestamp;
  double weight = 0.0;
  bool operator==(const EdgeRow &) const = default;
};

std::vector<EdgeRow> edge_rows(const std::vector<TemporalEdge> &edges);
std::vector<EdgeRow> edge_rows(const StaticGraph &g);
std::vector<EdgeRow> edge_rows(const CommitDag &dag);
std::vector<EdgeRow> edge_rows(const std::vector<LineEditDag> &dags);

enum class ExportFormat { Csv, Html };

ExportFormat export_format_from_string(const std::string &s);

std::string render_csv(const std::vector<EdgeRow> &rows);
std::string render_html(const std::vector<EdgeRow> &rows, bool directed, const std::string &title);
void export_graph(const std::vector<EdgeRow> &rows, bool directed, ExportFormat format,
                  const std::filesystem::path &out, const std::string &title = "network");

std::vector<EdgeRow> parse_edge_csv(std::string_view text);
StaticGraph graph_from_rows(const std::vector<EdgeRow> &rows, bool directed);

} // namespace coedit
