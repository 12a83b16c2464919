#include "coedit/networks.hpp"

#include "coedit/error.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace coedit {

const char *to_string(LineNodeKind k) {
  switch (k) {
  case LineNodeKind::Original: return "original";
  case LineNodeKind::Edit: return "edit";
  case LineNodeKind::Move: return "move";
  case LineNodeKind::CopyIn: return "copy_in";
  case LineNodeKind::DeletionSentinel: return "deletion_sentinel";
  }
  return "?";
}

const LineEditNode *LineEditDag::node(const std::string &id) const {
  for (const auto &n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<std::string> LineEditDag::roots() const {
  std::set<std::string> targets;
  for (const auto &e : edges) targets.insert(e.second);
  std::vector<std::string> out;
  for (const auto &n : nodes)
    if (!targets.count(n.id)) out.push_back(n.id);
  return out;
}

std::vector<std::string> LineEditDag::leaves() const {
  std::set<std::string> sources;
  for (const auto &e : edges) sources.insert(e.first);
  std::vector<std::string> out;
  for (const auto &n : nodes)
    if (!sources.count(n.id)) out.push_back(n.id);
  return out;
}

Digraph to_digraph(const LineEditDag &dag) {
  Digraph g;
  std::map<std::string, int> index;
  for (const auto &n : dag.nodes) {
    index[n.id] = static_cast<int>(g.ids.size());
    g.ids.push_back(n.id);
    g.timestamps.push_back(n.timestamp);
  }
  g.succ.resize(g.ids.size());
  for (const auto &[a, b] : dag.edges) g.succ[index.at(a)].push_back(index.at(b));
  for (auto &s : g.succ) std::sort(s.begin(), s.end());
  return g;
}

std::vector<std::vector<std::string>> enumerate_paths(const std::vector<LineEditDag> &dags) {
  std::vector<std::vector<std::string>> all;
  std::vector<Timestamp> root_time;
  for (const auto &d : dags) {
    for (auto &p : enumerate_paths(to_digraph(d))) {
      root_time.push_back(d.node(p.front())->timestamp);
      all.push_back(std::move(p));
    }
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (root_time[a] != root_time[b]) return root_time[a] < root_time[b];
    return all[a] < all[b];
  });
  std::vector<std::vector<std::string>> sorted;
  for (auto i : order) sorted.push_back(std::move(all[i]));
  return sorted;
}

namespace {

std::string version_id(const std::string &commit, const std::string &path, int line) {
  return commit + ":" + path + ":" + std::to_string(line);
}

class AncestorIndex {
public:
  explicit AncestorIndex(const std::vector<CommitRecord> &commits) {
    for (const auto &c : commits) {
      index_[c.meta.hash] = static_cast<int>(parents_.size());
      parents_.push_back({});
    }
    for (const auto &c : commits) {
      auto &p = parents_[index_[c.meta.hash]];
      for (const auto &h : c.meta.parent_hashes) {
        auto it = index_.find(h);
        if (it != index_.end()) p.push_back(it->second);
      }
    }
    memo_.resize(parents_.size());
  }

  // a == b counts as ancestor
  bool is_ancestor(const std::string &a, const std::string &b) {
    if (a == b) return true;
    auto ia = index_.find(a), ib = index_.find(b);
    if (ia == index_.end() || ib == index_.end()) return false;
    const auto &anc = ancestors(ib->second);
    return anc[static_cast<std::size_t>(ia->second)];
  }

private:
  const std::vector<bool> &ancestors(int c) {
    if (!memo_[c].empty()) return memo_[c];
    // iterative post-order to avoid deep recursion on long histories
    std::vector<int> stack = {c};
    while (!stack.empty()) {
      int u = stack.back();
      if (!memo_[u].empty()) {
        stack.pop_back();
        continue;
      }
      bool ready = true;
      for (int p : parents_[u])
        if (memo_[p].empty()) {
          stack.push_back(p);
          ready = false;
        }
      if (!ready) continue;
      std::vector<bool> set(parents_.size(), false);
      for (int p : parents_[u]) {
        set[p] = true;
        const auto &pa = memo_[p];
        for (std::size_t i = 0; i < pa.size(); ++i)
          if (pa[i]) set[i] = true;
      }
      memo_[u] = std::move(set);
      stack.pop_back();
    }
    return memo_[c];
  }

  std::map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<bool>> memo_;
};

std::set<std::string> rename_family(const Store &store, const std::string &file) {
  std::map<std::string, std::set<std::string>> adj;
  for (const auto &m : store.modifications()) {
    if (m.change_type == ChangeType::Renamed && m.old_path && m.new_path) {
      adj[*m.old_path].insert(*m.new_path);
      adj[*m.new_path].insert(*m.old_path);
    }
  }
  std::set<std::string> family = {file};
  std::vector<std::string> todo = {file};
  while (!todo.empty()) {
    auto p = todo.back();
    todo.pop_back();
    for (const auto &q : adj[p])
      if (family.insert(q).second) todo.push_back(q);
  }
  return family;
}

} // namespace

std::vector<LineEditDag> line_editing_dag(const RepositoryHandle &repo, const Store &store,
                                          const std::string &file, bool detect_moves,
                                          bool detect_copies) {
  if (store.config_description().find("granularity=block") != std::string::npos)
    throw Error(ErrorKind::InvalidArgument, "line-editing DAGs need a store mined per line");

  auto commit_list = store.commits();
  std::map<std::string, const CommitRecord *> commits;
  for (const auto &c : commit_list) {
    commits[c.meta.hash] = &c;
    if (c.meta.is_merge && c.detail == "merge not extracted")
      throw Error(ErrorKind::MissingMergeRecords,
                  "history contains merges; mine with merge extraction enabled");
  }
  AncestorIndex ancestry(commit_list);
  auto family = rename_family(store, file);

  EditFilter f;
  f.paths = family;
  f.granularity = Granularity::Line;
  auto records = store.query_edits(f);

  // group by (commit, parent side)
  struct Group {
    std::int64_t topo = 0;
    std::string commit;
    std::string parent;
    std::vector<const EditRecord *> records;
  };
  std::map<std::pair<std::string, std::string>, Group> groups;
  for (const auto &r : records) {
    auto it = commits.find(r.modifying_commit);
    if (it == commits.end()) continue;
    const auto &meta = it->second->meta;
    std::string parent = r.merge_parent ? *r.merge_parent
                                        : (meta.parent_hashes.empty() ? "" : meta.parent_hashes[0]);
    auto &g = groups[{r.modifying_commit, parent}];
    g.topo = meta.topo_index;
    g.commit = r.modifying_commit;
    g.parent = parent;
    g.records.push_back(&r);
  }
  std::vector<Group *> ordered;
  for (auto &[k, g] : groups) ordered.push_back(&g);
  std::sort(ordered.begin(), ordered.end(), [](const Group *a, const Group *b) {
    if (a->topo != b->topo) return a->topo < b->topo;
    return a->parent < b->parent;
  });

  std::map<std::string, LineEditNode> nodes;
  std::set<std::pair<std::string, std::string>> edges, copy_links;
  // base line version -> later representatives (moves / copies) in this family
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> reps;

  auto add_node = [&](const std::string &id, const std::string &commit, const std::string &path,
                      int line, LineNodeKind kind) -> LineEditNode & {
    auto [it, fresh] = nodes.try_emplace(id);
    if (fresh) {
      auto &n = it->second;
      n.id = id;
      n.commit = commit;
      n.path = path;
      n.line = line;
      n.kind = kind;
      if (auto c = commits.find(commit); c != commits.end()) {
        n.author = c->second->author_id;
        n.timestamp = c->second->meta.author_time;
      }
    }
    return it->second;
  };

  auto resolve = [&](const LineAttribution &a, const std::string &at) {
    std::string base = version_id(a.origin_commit, a.origin_path, a.origin_line);
    auto it = reps.find(base);
    if (it != reps.end()) {
      const std::pair<std::string, std::string> *best = nullptr;
      for (const auto &rep : it->second) {
        if (!ancestry.is_ancestor(rep.second, at)) continue;
        if (!best || commits.at(rep.second)->meta.topo_index >
                         commits.at(best->second)->meta.topo_index)
          best = &rep;
      }
      if (best) return best->first;
    }
    add_node(base, a.origin_commit, a.origin_path, a.origin_line, LineNodeKind::Original);
    return base;
  };

  std::map<std::pair<std::string, std::string>, std::vector<LineAttribution>> blame_cache;
  auto blame_at = [&](const std::string &commit,
                      const std::string &path) -> const std::vector<LineAttribution> & {
    auto key = std::make_pair(commit, path);
    auto it = blame_cache.find(key);
    if (it == blame_cache.end())
      it = blame_cache.emplace(key, repo.blame(commit, path, detect_moves, detect_copies)).first;
    return it->second;
  };
  auto line_of = [](const std::vector<LineAttribution> &b, int line) -> const LineAttribution & {
    if (line < 1 || static_cast<std::size_t>(line) > b.size())
      throw Error(ErrorKind::MalformedDiff, "line outside blamed file");
    return b[static_cast<std::size_t>(line - 1)];
  };

  for (const Group *g : ordered) {
    std::set<std::string> continued; // priors that live on in this commit
    std::vector<std::pair<const EditRecord *, std::string>> pre_side;

    for (const EditRecord *r : g->records) {
      if (r->edit_type == EditType::Deletion || !r->post_line_start) continue;
      const auto &post = line_of(blame_at(g->commit, *r->path_post), *r->post_line_start);
      std::string id = version_id(g->commit, *r->path_post, *r->post_line_start);
      if (post.origin_commit == g->commit) {
        auto kind = r->edit_type == EditType::Replacement ? LineNodeKind::Edit
                                                          : LineNodeKind::Original;
        auto &n = add_node(id, g->commit, *r->path_post, *r->post_line_start, kind);
        if (r->edit_type == EditType::Replacement) {
          n.kind = LineNodeKind::Edit;
          const auto &pre = line_of(blame_at(g->parent, *r->path_pre), *r->pre_line_start);
          std::string prior = resolve(pre, g->parent);
          edges.insert({prior, id});
          continued.insert(prior);
        }
      } else if (family.count(post.origin_path)) {
        std::string prior = resolve(post, g->parent);
        add_node(id, g->commit, *r->path_post, *r->post_line_start, LineNodeKind::Move);
        if (prior != id) edges.insert({prior, id});
        reps[version_id(post.origin_commit, post.origin_path, post.origin_line)].push_back(
            {id, g->commit});
        continued.insert(prior);
      } else {
        add_node(id, g->commit, *r->path_post, *r->post_line_start, LineNodeKind::CopyIn);
        std::string source = version_id(post.origin_commit, post.origin_path, post.origin_line);
        copy_links.insert({source, id});
        reps[source].push_back({id, g->commit});
      }
    }

    for (const EditRecord *r : g->records) {
      if (r->edit_type == EditType::Addition || !r->pre_line_start) continue;
      const auto &pre = line_of(blame_at(g->parent, *r->path_pre), *r->pre_line_start);
      std::string prior = resolve(pre, g->parent);
      if (continued.count(prior)) continue;
      // a replacement whose new line turned out to be a moved one still ends the old line
      std::string sid = "deleted:" + g->commit + ":" + *r->path_pre + ":" +
                        std::to_string(*r->pre_line_start) +
                        (r->merge_parent ? ":" + *r->merge_parent : std::string{});
      add_node(sid, g->commit, *r->path_pre, *r->pre_line_start, LineNodeKind::DeletionSentinel);
      edges.insert({prior, sid});
    }
  }

  // a node reached by an edge cannot stay marked as a lineage start
  for (const auto &[a, b] : edges) {
    auto &n = nodes.at(b);
    if (n.kind == LineNodeKind::Original) n.kind = LineNodeKind::Edit;
  }

  // weakly connected components
  std::map<std::string, std::string> parent;
  for (const auto &[id, n] : nodes) parent[id] = id;
  std::function<std::string(const std::string &)> find = [&](const std::string &x) {
    std::string root = x;
    while (parent[root] != root) root = parent[root];
    for (std::string cur = x; parent[cur] != root;) {
      std::string next = parent[cur];
      parent[cur] = root;
      cur = next;
    }
    return root;
  };
  for (const auto &[a, b] : edges) {
    auto ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<std::string, LineEditDag> components;
  for (const auto &[id, n] : nodes) components[find(id)].nodes.push_back(n);
  for (const auto &e : edges) components[find(e.first)].edges.insert(e);
  for (const auto &l : copy_links) {
    if (nodes.count(l.second)) components[find(l.second)].copy_links.insert(l);
  }

  std::vector<LineEditDag> dags;
  for (auto &[root, dag] : components) {
    std::sort(dag.nodes.begin(), dag.nodes.end(), [](const auto &a, const auto &b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.id < b.id;
    });
    // lineage id: earliest root among a node's ancestors, propagated in
    // topological order
    Digraph g = to_digraph(dag);
    std::vector<int> indeg(g.ids.size(), 0);
    for (const auto &s : g.succ)
      for (int v : s) ++indeg[v];
    std::vector<int> queue;
    for (std::size_t i = 0; i < g.ids.size(); ++i)
      if (indeg[i] == 0) {
        queue.push_back(static_cast<int>(i));
        dag.nodes[i].line_instance = dag.nodes[i].id;
      }
    std::size_t visited = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int u = queue[qi];
      ++visited;
      for (int v : g.succ[u]) {
        auto &child = dag.nodes[static_cast<std::size_t>(v)];
        const auto &mine = dag.nodes[static_cast<std::size_t>(u)].line_instance;
        if (child.line_instance.empty()) child.line_instance = mine;
        if (--indeg[v] == 0) queue.push_back(v);
      }
    }
    if (visited != g.ids.size())
      throw Error(ErrorKind::CycleDetected, "line-editing graph for " + file + " has a cycle");
    dags.push_back(std::move(dag));
  }
  std::sort(dags.begin(), dags.end(), [](const LineEditDag &a, const LineEditDag &b) {
    const auto &na = a.nodes.front(), &nb = b.nodes.front();
    if (na.timestamp != nb.timestamp) return na.timestamp < nb.timestamp;
    return na.id < nb.id;
  });
  return dags;
}

} // namespace coedit
