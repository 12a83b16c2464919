#include "coedit/error.hpp"
#include "coedit/networks.hpp"
#include "fixtures.hpp"
#include "harness.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

using namespace coedit;

namespace {

const fixture::Mined &mined() {
  static const auto m = fixture::mine_history(fixture::main_history(), MiningConfig{}, "coedit-net");
  return m;
}

std::vector<EditRecord> expected() {
  return oracle::expected_edits(fixture::main_history(), mined().hashes, {});
}

const std::string alice = "alice@example.org", bob = "bob@example.org", carol = "carol@example.org";

std::multiset<std::string> edge_keys(const std::vector<TemporalEdge> &edges) {
  std::multiset<std::string> out;
  for (const auto &e : edges)
    out.insert(e.source + ">" + e.target + "@" + std::to_string(e.timestamp) + "=" +
               std::to_string(e.weight) + ":" + e.file);
  return out;
}

} // namespace

TEST(CoeditEdges, MatchRecordsFromTheOracle) {
  std::vector<TemporalEdge> want_lev, want_lines;
  for (const auto &r : expected()) {
    if (r.merge_discard || r.modifying_author == r.original_author) continue;
    if (r.edit_type == EditType::Replacement)
      want_lev.push_back({r.modifying_author, r.original_author, r.timestamp,
                          static_cast<double>(*r.levenshtein), r.path(), r.modifying_commit});
    if (r.edit_type != EditType::Addition)
      want_lines.push_back({r.modifying_author, r.original_author, r.timestamp,
                            static_cast<double>(r.num_pre_lines), r.path(), r.modifying_commit});
  }
  auto lev = temporal_coedit_edges(*mined().store, WeightMode::Levenshtein, false);
  auto lines = temporal_coedit_edges(*mined().store, WeightMode::LineCount, false);
  EXPECT_EQ(edge_keys(lev), edge_keys(want_lev));
  EXPECT_EQ(edge_keys(lines), edge_keys(want_lines));
  for (std::size_t i = 1; i < lev.size(); ++i) EXPECT_LE(lev[i - 1].timestamp, lev[i].timestamp);
}

TEST(CoeditEdges, StaticProjectionOfTheFixture) {
  auto g = aggregate(temporal_coedit_edges(*mined().store, WeightMode::Levenshtein, false));
  EXPECT_TRUE(g.has_edge(bob, alice));
  EXPECT_TRUE(g.has_edge(carol, alice));
  EXPECT_TRUE(g.has_edge(alice, bob));
  EXPECT_FALSE(g.has_edge(bob, carol));
  EXPECT_FALSE(g.has_edge(carol, bob));
  EXPECT_FALSE(g.has_edge(alice, alice));
  auto loops = aggregate(temporal_coedit_edges(*mined().store, WeightMode::Levenshtein, true));
  EXPECT_TRUE(loops.has_edge(alice, alice));
  EXPECT_TRUE(loops.has_edge(bob, bob));
  auto u = undirected_collapse(loops);
  EXPECT_FALSE(u.directed);
  EXPECT_EQ(u.edge_count(), fixture::kMainCoeditLinks);
  EXPECT_DOUBLE_EQ(u.edges.at({alice, bob}), g.edges.at({alice, bob}) + g.edges.at({bob, alice}));
}

TEST(CoeditEdges, TimeRangeFilters) {
  TimeRange r{fixture::kT0 + 8 * fixture::kDay, fixture::kT0 + 12 * fixture::kDay};
  auto all = temporal_coedit_edges(*mined().store, WeightMode::LineCount, true);
  auto some = temporal_coedit_edges(*mined().store, WeightMode::LineCount, true, r);
  std::vector<TemporalEdge> want;
  for (const auto &e : all)
    if (r.contains(e.timestamp)) want.push_back(e);
  EXPECT_EQ(some, want);
  EXPECT_FALSE(some.empty());
}

TEST(CoeditEdges, DiscardsAndAdditionsAreNeverEdges) {
  EditRecord r;
  r.edit_type = EditType::Deletion;
  r.num_pre_lines = 1;
  EXPECT_FALSE(is_coedit(r, WeightMode::Levenshtein));
  EXPECT_TRUE(is_coedit(r, WeightMode::LineCount));
  r.merge_discard = true;
  EXPECT_FALSE(is_coedit(r, WeightMode::LineCount));
  r.edit_type = EditType::Addition;
  r.merge_discard = false;
  EXPECT_FALSE(is_coedit(r, WeightMode::LineCount));
}

TEST(Windows, BoundariesAreHalfOpen) {
  std::vector<TemporalEdge> edges = {{"a", "b", 10, 1.0, "f", "c1"},
                                     {"a", "b", 20, 2.0, "f", "c2"},
                                     {"b", "c", 30, 4.0, "f", "c3"}};
  auto g = aggregate_window(edges, 10, 20);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(g.edges.at({"a", "b"}), 3.0);
  EXPECT_EQ(aggregate_window(edges, 11, 20).edges.at({"a", "b"}), 2.0);
  EXPECT_TRUE(aggregate_window(edges, 31, 100).edges.empty());
  EXPECT_THROW(aggregate_window(edges, 0, 0), Error);
}

TEST(Windows, SlidingWindowsPartitionEdges) {
  auto edges = temporal_coedit_edges(*mined().store, WeightMode::Levenshtein, true);
  double total = 0;
  for (const auto &e : edges) total += e.weight;
  double summed = 0;
  for (Timestamp s = fixture::kT0; s < fixture::kT0 + 30 * fixture::kDay; s += fixture::kDay)
    for (const auto &[k, w] : aggregate_window(edges, s, fixture::kDay).edges) summed += w;
  EXPECT_DOUBLE_EQ(summed, total);
}

TEST(Bipartite, WeightsCountDistinctCommits) {
  auto g = bipartite_graph(*mined().store);
  EXPECT_TRUE(g.directed);
  EXPECT_DOUBLE_EQ(g.edges.at({alice, "src/core.c"}), 7.0);
  EXPECT_DOUBLE_EQ(g.edges.at({bob, "src/util.c"}), 2.0); // c03, f2; r1 counts for the new name
  EXPECT_TRUE(g.has_edge(bob, "src/helpers.c"));
  EXPECT_FALSE(g.has_edge(carol, "src/util.c"));
}

TEST(Bipartite, HandBuiltModifications) {
  std::vector<ModificationRecord> mods = {
      {"c1", "", std::nullopt, "x", ChangeType::Added, "a", 1, 0, 3, 3},
      {"c2", "c1", "x", "x", ChangeType::Modified, "a", 2, 3, 3, 1},
      {"c3", "c2", "x", "x", ChangeType::Modified, "b", 3, 3, 4, 1},
      {"c3", "c2", "y", "y", ChangeType::Modified, "b", 3, 1, 1, 1},
  };
  auto bg = bipartite_graph(mods);
  EXPECT_DOUBLE_EQ(bg.edges.at({"a", "x"}), 2.0);
  EXPECT_DOUBLE_EQ(bg.edges.at({"b", "y"}), 1.0);
  auto cg = coauthorship_graph(mods);
  EXPECT_FALSE(cg.directed);
  EXPECT_EQ(cg.edge_count(), 1u);
  EXPECT_TRUE(cg.has_edge("b", "a"));
}

TEST(Coauthorship, FixtureHasAllThreePairs) {
  auto g = coauthorship_graph(*mined().store);
  EXPECT_EQ(g.edge_count(), fixture::kMainCoauthorLinks);
  EXPECT_EQ(g.nodes.size(), 3u);
}

TEST(CommitDag, EdgesFollowOriginalToModifyingCommit) {
  const std::string file = "src/core.c";
  std::set<std::pair<std::string, std::string>> want;
  for (const auto &r : expected())
    if ((r.path_pre == file || r.path_post == file) && r.original_commit != r.modifying_commit)
      want.insert({r.original_commit, r.modifying_commit});
  auto dag = commit_dag(*mined().store, file);
  EXPECT_EQ(dag.edges, want);
  const auto &h = mined().hashes;
  // without merge extraction the merge's own line has no incoming edge
  EXPECT_EQ(dag.roots(), (std::set<std::string>{h.at("c01"), h.at("M")}));
  EXPECT_TRUE(dag.leaves().count(h.at("d16")));
  EXPECT_TRUE(dag.intermediates().count(h.at("c02")));
  for (const auto &n : dag.intermediates()) {
    EXPECT_FALSE(dag.roots().count(n));
    EXPECT_FALSE(dag.leaves().count(n));
  }
}

TEST(CommitDag, BackwardEdgeIsACycle) {
  fixture::TempDir dir;
  auto store = Store::init(dir / "s.db", "fp");
  auto commit = [](const std::string &h, std::int64_t topo) {
    CommitRecord c;
    c.meta.hash = h;
    c.meta.author_email = "a@x";
    c.meta.topo_index = topo;
    c.author_id = "a@x";
    return c;
  };
  EditRecord r;
  r.modifying_commit = "early";
  r.original_commit = "late";
  r.path_pre = r.path_post = "f";
  r.pre_line_start = r.post_line_start = 1;
  r.num_pre_lines = r.num_post_lines = 1;
  r.levenshtein = 1;
  store->write_commit_result(commit("late", 1), {}, {});
  store->write_commit_result(commit("early", 0), {}, {r});
  try {
    commit_dag(*store, "f");
    FAIL() << "expected CycleDetected";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::CycleDetected);
  }
}

TEST(Paths, RandomDagsMatchBruteForce) {
  std::mt19937 rng(20220301);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 12);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (rng() % 100 < 30) edges.emplace_back(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
    Digraph g;
    for (int i = 0; i < n; ++i) {
      g.ids.push_back("n" + std::to_string(i));
      g.timestamps.push_back(static_cast<Timestamp>(rng() % 5));
    }
    g.succ.resize(static_cast<std::size_t>(n));
    for (auto [a, b] : edges) g.succ[static_cast<std::size_t>(a)].push_back(b);
    auto paths = enumerate_paths(g);
    ASSERT_EQ(static_cast<long long>(paths.size()), oracle::count_paths(n, edges)) << trial;
    std::set<std::vector<std::string>> want;
    for (const auto &p : oracle::all_paths(n, edges)) {
      std::vector<std::string> ids;
      for (int k : p) ids.push_back(g.ids[static_cast<std::size_t>(k)]);
      want.insert(ids);
    }
    EXPECT_EQ(std::set<std::vector<std::string>>(paths.begin(), paths.end()), want) << trial;
  }
}

TEST(Paths, CycleThrows) {
  Digraph g{{"a", "b", "c"}, {0, 1, 2}, {{1}, {2}, {0}}};
  EXPECT_THROW(enumerate_paths(g), Error);
  // a cycle hanging off a proper root is detected as well
  Digraph h{{"r", "b", "c"}, {0, 1, 2}, {{1}, {2}, {1}}};
  EXPECT_THROW(enumerate_paths(h), Error);
}

TEST(Paths, OrderedByRootTimestamp) {
  Digraph g{{"late", "early", "x"}, {5, 1, 6}, {{2}, {2}, {}}};
  auto paths = enumerate_paths(g);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].front(), "early");
  EXPECT_EQ(paths[1].front(), "late");
}

TEST(Export, CsvRoundTrip) {
  std::vector<EdgeRow> rows = {{"a,\"x\"", "b", 5, 1.5}, {"c", "d", std::nullopt, 2}};
  auto text = render_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), "source,target,timestamp,weight");
  EXPECT_EQ(parse_edge_csv(text), rows);
  EXPECT_THROW(parse_edge_csv("from,to\nx,y\n"), Error);
}

TEST(Export, HtmlIsSelfContained) {
  std::vector<EdgeRow> rows = {{"</script><b>", "b", 5, 1.0}};
  auto html = render_html(rows, true, "t");
  EXPECT_NE(html.find("<svg"), std::string::npos);
  EXPECT_EQ(html.find("</script><b>"), std::string::npos);
  EXPECT_EQ(html.find("<script src"), std::string::npos);
}

TEST(Export, WritesFilesAndRebuildsGraphs) {
  fixture::TempDir dir;
  auto g = aggregate(temporal_coedit_edges(*mined().store, WeightMode::Levenshtein, false));
  export_graph(edge_rows(g), true, ExportFormat::Csv, dir / "g.csv");
  std::ifstream in(dir / "g.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(graph_from_rows(parse_edge_csv(ss.str()), true).edges, g.edges);
  EXPECT_THROW(export_format_from_string("gexf"), Error);
}
