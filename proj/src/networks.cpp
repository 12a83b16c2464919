#include "coedit/networks.hpp"

#include "coedit/error.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace coedit {

const char *to_string(WeightMode m) {
  return m == WeightMode::Levenshtein ? "levenshtein" : "line_count";
}

WeightMode weight_mode_from_string(const std::string &s) {
  if (s == "levenshtein") return WeightMode::Levenshtein;
  if (s == "line_count" || s == "lines") return WeightMode::LineCount;
  throw Error(ErrorKind::InvalidArgument, "unknown weight mode '" + s + "'");
}

bool is_coedit(const EditRecord &r, WeightMode mode) {
  if (r.merge_discard) return false;
  if (r.edit_type == EditType::Replacement) return true;
  return r.edit_type == EditType::Deletion && mode == WeightMode::LineCount;
}

double coedit_weight(const EditRecord &r, WeightMode mode) {
  if (mode == WeightMode::Levenshtein) return static_cast<double>(r.levenshtein.value_or(0));
  return static_cast<double>(r.num_pre_lines);
}

std::vector<TemporalEdge> coedit_edges(const std::vector<EditRecord> &records, WeightMode mode,
                                       bool include_self_loops) {
  std::vector<TemporalEdge> edges;
  for (const auto &r : records) {
    if (!is_coedit(r, mode)) continue;
    if (!include_self_loops && r.modifying_author == r.original_author) continue;
    edges.push_back({r.modifying_author, r.original_author, r.timestamp, coedit_weight(r, mode),
                     r.path(), r.modifying_commit});
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const auto &a, const auto &b) { return a.timestamp < b.timestamp; });
  return edges;
}

std::vector<TemporalEdge> temporal_coedit_edges(const Store &store, WeightMode mode,
                                                bool include_self_loops, const TimeRange &range) {
  EditFilter f;
  f.time = range;
  f.edit_types = {EditType::Replacement, EditType::Deletion};
  return coedit_edges(store.query_edits(f), mode, include_self_loops);
}

void StaticGraph::add_edge(const std::string &a, const std::string &b, double weight) {
  nodes.insert(a);
  nodes.insert(b);
  auto key = directed || a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  edges[key] += weight;
}

bool StaticGraph::has_edge(const std::string &a, const std::string &b) const {
  if (edges.count({a, b})) return true;
  return !directed && edges.count({b, a});
}

StaticGraph aggregate(const std::vector<TemporalEdge> &edges) {
  StaticGraph g;
  for (const auto &e : edges) g.add_edge(e.source, e.target, e.weight);
  return g;
}

StaticGraph aggregate_window(const std::vector<TemporalEdge> &edges, Timestamp window_start,
                             Timestamp window_length) {
  if (window_length <= 0)
    throw Error(ErrorKind::InvalidArgument, "window length must be positive");
  StaticGraph g;
  // edges are time-ordered, so the window is one contiguous run
  auto first = std::lower_bound(edges.begin(), edges.end(), window_start,
                                [](const TemporalEdge &e, Timestamp t) { return e.timestamp < t; });
  for (auto it = first; it != edges.end() && it->timestamp < window_start + window_length; ++it)
    g.add_edge(it->source, it->target, it->weight);
  return g;
}

StaticGraph undirected_collapse(const StaticGraph &g) {
  StaticGraph u;
  u.directed = false;
  u.nodes = g.nodes;
  for (const auto &[key, w] : g.edges)
    if (key.first != key.second) u.add_edge(key.first, key.second, w);
  return u;
}

namespace {

// (developer, file) -> number of distinct commits touching the file
std::map<std::pair<std::string, std::string>, int>
developer_file_counts(const std::vector<ModificationRecord> &mods) {
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto &m : mods) {
    if (seen.insert({m.commit, m.author_id, m.path()}).second) ++counts[{m.author_id, m.path()}];
  }
  return counts;
}

} // namespace

StaticGraph bipartite_graph(const std::vector<ModificationRecord> &mods) {
  StaticGraph g;
  for (const auto &[key, n] : developer_file_counts(mods)) g.add_edge(key.first, key.second, n);
  return g;
}

StaticGraph bipartite_graph(const Store &store, const TimeRange &range) {
  return bipartite_graph(store.modifications(range));
}

StaticGraph coauthorship_graph(const std::vector<ModificationRecord> &mods) {
  std::map<std::string, std::set<std::string>> authors_of;
  StaticGraph g;
  g.directed = false;
  for (const auto &[key, n] : developer_file_counts(mods)) {
    authors_of[key.second].insert(key.first);
    g.nodes.insert(key.first);
  }
  for (const auto &[file, authors] : authors_of) {
    for (auto a = authors.begin(); a != authors.end(); ++a)
      for (auto b = std::next(a); b != authors.end(); ++b) g.add_edge(*a, *b, 1.0);
  }
  return g;
}

StaticGraph coauthorship_graph(const Store &store, const TimeRange &range) {
  return coauthorship_graph(store.modifications(range));
}

std::set<std::string> CommitDag::roots() const {
  std::set<std::string> r = nodes;
  for (const auto &e : edges) r.erase(e.second);
  return r;
}

std::set<std::string> CommitDag::leaves() const {
  std::set<std::string> r = nodes;
  for (const auto &e : edges) r.erase(e.first);
  return r;
}

std::set<std::string> CommitDag::intermediates() const {
  std::set<std::string> r;
  auto roots_ = roots(), leaves_ = leaves();
  for (const auto &n : nodes)
    if (!roots_.count(n) && !leaves_.count(n)) r.insert(n);
  return r;
}

CommitDag commit_dag(const Store &store, const std::string &file) {
  CommitDag dag;
  dag.file = file;
  EditFilter f;
  f.paths = {file};
  std::map<std::string, std::int64_t> order;
  for (const auto &c : store.commits()) order[c.meta.hash] = c.meta.topo_index;
  for (const auto &r : store.query_edits(f)) {
    if (r.merge_discard) continue;
    dag.nodes.insert(r.modifying_commit);
    dag.nodes.insert(r.original_commit);
    if (r.original_commit == r.modifying_commit) continue;
    auto v = order.find(r.original_commit), w = order.find(r.modifying_commit);
    if (v != order.end() && w != order.end() && v->second >= w->second)
      throw Error(ErrorKind::CycleDetected, "commit " + r.original_commit +
                                                " is not an ancestor of " + r.modifying_commit);
    dag.edges.insert({r.original_commit, r.modifying_commit});
  }
  return dag;
}

std::set<std::string> edited_files(const Store &store) {
  std::set<std::string> files;
  for (const auto &r : store.query_edits()) {
    if (r.path_pre) files.insert(*r.path_pre);
    if (r.path_post) files.insert(*r.path_post);
  }
  return files;
}

std::vector<std::vector<std::string>> enumerate_paths(const Digraph &g) {
  const int n = static_cast<int>(g.ids.size());
  std::vector<int> indeg(n, 0);
  for (const auto &s : g.succ)
    for (int v : s) ++indeg[v];

  // colour-based cycle check covering nodes unreachable from any root too
  std::vector<int> colour(n, 0);
  std::function<void(int)> visit = [&](int u) {
    colour[u] = 1;
    for (int v : g.succ[u]) {
      if (colour[v] == 1)
        throw Error(ErrorKind::CycleDetected, "cycle through node " + g.ids[v]);
      if (colour[v] == 0) visit(v);
    }
    colour[u] = 2;
  };
  for (int u = 0; u < n; ++u)
    if (colour[u] == 0) visit(u);

  std::vector<std::vector<std::string>> paths;
  std::vector<std::string> current;
  std::function<void(int)> walk = [&](int u) {
    current.push_back(g.ids[u]);
    if (g.succ[u].empty()) {
      paths.push_back(current);
    } else {
      for (int v : g.succ[u]) walk(v);
    }
    current.pop_back();
  };
  std::vector<int> roots;
  for (int u = 0; u < n; ++u)
    if (indeg[u] == 0) roots.push_back(u);
  for (int r : roots) walk(r);

  std::map<std::string, Timestamp> ts;
  for (int u = 0; u < n; ++u) ts[g.ids[u]] = g.timestamps.empty() ? 0 : g.timestamps[u];
  std::sort(paths.begin(), paths.end(), [&](const auto &a, const auto &b) {
    Timestamp ta = ts[a.front()], tb = ts[b.front()];
    if (ta != tb) return ta < tb;
    return a < b;
  });
  return paths;
}

} // namespace coedit
