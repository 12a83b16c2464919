#include "coedit/analytics.hpp"
#include "coedit/error.hpp"
#include "fixtures.hpp"
#include "harness.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace coedit;
using fixture::kDay;

namespace {

StaticGraph undirected(std::initializer_list<std::pair<const char *, const char *>> edges) {
  StaticGraph g;
  g.directed = false;
  for (auto [a, b] : edges) g.add_edge(a, b, 1.0);
  return g;
}

StaticGraph complete(int n) {
  StaticGraph g;
  g.directed = false;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(std::to_string(i), std::to_string(j), 1.0);
  return g;
}

// Freeman's formula written out over a plain degree table
double freeman(const std::map<std::string, int> &degree) {
  int max = 0;
  for (const auto &[n, d] : degree) max = std::max(max, d);
  double sum = 0;
  for (const auto &[n, d] : degree) sum += max - d;
  double n = static_cast<double>(degree.size());
  return sum / ((n - 1) * (n - 2));
}

const fixture::Mined &window_store() {
  static const auto m = fixture::mine_history(fixture::window_history(), MiningConfig{}, "coedit-win");
  return m;
}

const fixture::Mined &main_store() {
  static const auto m = fixture::mine_history(fixture::main_history(), MiningConfig{}, "coedit-ana");
  return m;
}

} // namespace

TEST(Centralisation, ReferenceGraphs) {
  auto star = undirected({{"hub", "a"}, {"hub", "b"}, {"hub", "c"}, {"hub", "d"}});
  EXPECT_NEAR(*degree_centralisation(star), 1.0, 1e-12);
  EXPECT_NEAR(*degree_centralisation(complete(4)), 0.0, 1e-12);
  auto path = undirected({{"a", "b"}, {"b", "c"}, {"c", "d"}});
  EXPECT_NEAR(*degree_centralisation(path), 1.0 / 3.0, 1e-12);
  EXPECT_FALSE(degree_centralisation(undirected({{"a", "b"}})));
  EXPECT_FALSE(degree_centralisation(StaticGraph{}));
}

TEST(Centralisation, DirectedInputIsCollapsed) {
  StaticGraph g;
  for (const char *leaf : {"a", "b", "c", "d"}) {
    g.add_edge("hub", leaf, 2.0);
    g.add_edge(leaf, "hub", 1.0);
  }
  g.add_edge("hub", "hub", 5.0);
  EXPECT_NEAR(*degree_centralisation(g), 1.0, 1e-12);
}

TEST(Centralisation, RandomGraphsMatchFormula) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 3 + static_cast<int>(rng() % 8);
    StaticGraph g;
    g.directed = false;
    std::map<std::string, int> degree;
    for (int i = 0; i < n; ++i) {
      g.nodes.insert("v" + std::to_string(i));
      degree["v" + std::to_string(i)] = 0;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng() % 3 == 0) {
          g.add_edge("v" + std::to_string(i), "v" + std::to_string(j), 1.0);
          ++degree["v" + std::to_string(i)];
          ++degree["v" + std::to_string(j)];
        }
    auto c = degree_centralisation(g);
    ASSERT_TRUE(c);
    EXPECT_NEAR(*c, freeman(degree), 1e-12);
    EXPECT_GE(*c, -1e-12);
    EXPECT_LE(*c, 1.0 + 1e-12);
  }
}

TEST(MeanOutDegree, EdgesPerNode) {
  StaticGraph g;
  g.add_edge("a", "b", 1);
  g.add_edge("a", "c", 1);
  g.add_edge("b", "a", 1);
  EXPECT_DOUBLE_EQ(*mean_out_degree(g), 1.0);
  EXPECT_FALSE(mean_out_degree(StaticGraph{}));
}

TEST(Windows, SpecValidationAndStarts) {
  EXPECT_THROW(check_window_spec({0, 10}), Error);
  EXPECT_THROW(check_window_spec({10, -1}), Error);
  EXPECT_FALSE(check_window_spec({10, 10}));
  EXPECT_TRUE(check_window_spec({10, 20}));
  EXPECT_EQ(window_starts(0, 25, {10, 10}), (std::vector<Timestamp>{0, 10, 20}));
  EXPECT_EQ(window_starts(0, 20, {10, 10}), (std::vector<Timestamp>{0, 10, 20}));
  EXPECT_EQ(window_starts(5, 5, {10, 3}), std::vector<Timestamp>{5});
}

TEST(Delta, WindowFixtureShowsExtraCoeditLinks) {
  const auto &s = *window_store().store;
  TimeRange window{fixture::kWindowStart, fixture::kWindowStart + fixture::kWindowLength};
  auto in = delta_counts(s, window);
  EXPECT_EQ(in.m_f, 1u);
  EXPECT_EQ(in.m_l, 2u);
  EXPECT_DOUBLE_EQ(*in.delta(), fixture::kWindowDelta);
  EXPECT_LT(*in.delta(), 1.0);
  EXPECT_DOUBLE_EQ(*delta_counts(s).delta(), fixture::kWindowFullDelta);

  auto series = network_delta(s, {fixture::kWindowLength, fixture::kWindowLength});
  ASSERT_EQ(series.values.size(), 2u);
  EXPECT_EQ(series.window_starts[1], fixture::kWindowStart);
  EXPECT_FALSE(series.values[0]); // only alice is active in year one
  EXPECT_DOUBLE_EQ(*series.values[1], fixture::kWindowDelta);
}

TEST(Delta, FullHistoryIsAtLeastOne) {
  auto d = delta_counts(*main_store().store);
  EXPECT_EQ(d.m_f, fixture::kMainCoauthorLinks);
  EXPECT_EQ(d.m_l, fixture::kMainCoeditLinks);
  EXPECT_DOUBLE_EQ(*d.delta(), fixture::kMainDelta);
  EXPECT_GE(*d.delta(), 1.0);
  EXPECT_FALSE(DeltaCounts{}.delta());
}

// Over the whole history both ends of a co-edit link have committed to the
// file the line lives in, so the link is also a co-authorship link.
TEST(Delta, CoeditLinksImplyCoauthorshipOverFullHistory) {
  for (const auto *m : {&main_store(), &window_store()}) {
    auto coauth = coauthorship_graph(*m->store);
    auto coedit = undirected_collapse(aggregate(topology_edges(*m->store)));
    for (const auto &[pair, w] : coedit.edges) EXPECT_TRUE(coauth.has_edge(pair.first, pair.second));
  }
}

TEST(Rolling, MetricsMatchPerWindowRecount) {
  const auto &s = *main_store().store;
  WindowSpec spec{7 * kDay, 2 * kDay};
  auto series = rolling_metrics(s, spec, {Metric::NumDevelopers, Metric::NumUniqueEdges,
                                          Metric::MeanOutDegree, Metric::DegreeCentralisation});
  ASSERT_EQ(series.size(), 4u);
  auto span = history_span(s);
  ASSERT_TRUE(span);
  EXPECT_EQ(span->first, fixture::kT0);
  EXPECT_EQ(series[0].window_starts, window_starts(span->first, span->second, spec));

  auto records = oracle::expected_edits(fixture::main_history(), main_store().hashes, {});
  for (std::size_t w = 0; w < series[0].window_starts.size(); ++w) {
    Timestamp start = series[0].window_starts[w];
    std::set<std::pair<std::string, std::string>> edges;
    std::set<std::string> devs;
    for (const auto &r : records) {
      if (r.edit_type == EditType::Addition || r.merge_discard) continue;
      if (r.modifying_author == r.original_author) continue;
      if (r.timestamp < start || r.timestamp >= start + spec.window_length) continue;
      edges.insert({r.modifying_author, r.original_author});
      devs.insert(r.modifying_author);
      devs.insert(r.original_author);
    }
    EXPECT_EQ(*series[0].values[w], static_cast<double>(devs.size()));
    EXPECT_EQ(*series[1].values[w], static_cast<double>(edges.size()));
    if (devs.empty()) {
      EXPECT_FALSE(series[2].values[w]);
    } else {
      EXPECT_DOUBLE_EQ(*series[2].values[w], static_cast<double>(edges.size()) / devs.size());
    }
    EXPECT_EQ(series[3].values[w].has_value(), devs.size() >= 3);
  }
  EXPECT_EQ(metric_from_string("degree_centralization"), Metric::DegreeCentralisation);
  EXPECT_THROW(metric_from_string("pagerank"), Error);
}

TEST(OwnForeign, ProportionsFromRecords) {
  const auto &s = *main_store().store;
  WindowSpec spec{5 * kDay, 5 * kDay};
  auto split = own_foreign_split(s, spec, WeightMode::Levenshtein);
  auto records = oracle::expected_edits(fixture::main_history(), main_store().hashes, {});
  ASSERT_FALSE(split.window_starts.empty());
  for (std::size_t w = 0; w < split.window_starts.size(); ++w) {
    Timestamp start = split.window_starts[w];
    double own = 0, foreign = 0;
    std::size_t count = 0;
    for (const auto &r : records) {
      if (r.edit_type != EditType::Replacement) continue;
      if (r.timestamp < start || r.timestamp >= start + spec.window_length) continue;
      ++count;
      (r.modifying_author == r.original_author ? own : foreign) += static_cast<double>(*r.levenshtein);
    }
    EXPECT_EQ(split.total_edit_count[w], count);
    EXPECT_DOUBLE_EQ(split.total_weight[w], own + foreign);
    if (own + foreign > 0) {
      EXPECT_NEAR(*split.proportion_own[w], own / (own + foreign), 1e-12);
      EXPECT_NEAR(*split.proportion_own[w] + *split.proportion_foreign[w], 1.0, 1e-12);
    } else {
      EXPECT_FALSE(split.proportion_own[w]);
    }
  }
  EXPECT_EQ(split.as_series().size(), 4u);
}

TEST(Render, CsvAndHtml) {
  MetricSeries a{"delta", {0, 10}, {1.5, std::nullopt}};
  MetricSeries b{"n", {0, 10}, {2.0, 3.0}};
  EXPECT_EQ(render_series_csv({a, b}), "window_start,delta,n\n0,1.5,2\n10,,3\n");
  auto html = render_series_html({a, b}, "series <x>");
  EXPECT_NE(html.find("<svg"), std::string::npos);
  EXPECT_EQ(html.find("series <x>"), std::string::npos);
  EXPECT_EQ(html.find("<script src"), std::string::npos);
}

TEST(Render, EmptyStore) {
  fixture::TempDir dir;
  auto s = Store::init(dir / "s.db", "fp");
  EXPECT_FALSE(history_span(*s));
  auto series = rolling_metrics(*s, {}, {Metric::NumDevelopers});
  ASSERT_EQ(series.size(), 1u);
  EXPECT_TRUE(series[0].values.empty());
  EXPECT_TRUE(network_delta(*s, {}).values.empty());
}
