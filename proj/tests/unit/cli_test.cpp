#include "coedit/analytics.hpp"
#include "coedit/cli.hpp"
#include "coedit/miner.hpp"
#include "coedit/networks.hpp"
#include "coedit/productivity.hpp"
#include "fixtures.hpp"
#include "harness.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace coedit;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string quote(const std::string &s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dir_ = new fixture::TempDir("coedit-cli");
    fixture::materialize(fixture::main_history(), *dir_ / "repo");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::filesystem::path path(const std::string &name) { return *dir_ / name; }
  static std::string repo() { return path("repo").string(); }

  // runs the real executable; stdout and stderr are captured separately
  static Outcome run(const std::vector<std::string> &args) {
    std::string cmd = quote(COEDIT_CLI_PATH);
    for (const auto &a : args) cmd += " " + quote(a);
    cmd += " >" + quote(path("stdout.txt").string()) + " 2>" + quote(path("stderr.txt").string());
    int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(path("stdout.txt"));
    r.err = slurp(path("stderr.txt"));
    return r;
  }

  static std::string mined_store() {
    static std::string db;
    if (db.empty()) {
      db = path("main.db").string();
      auto r = run({"mine", repo(), db, "--extract-merges", "--numprocesses", "2"});
      EXPECT_EQ(r.code, 0) << r.err;
    }
    return db;
  }

  static fixture::TempDir *dir_;
};

fixture::TempDir *Cli::dir_ = nullptr;

} // namespace

TEST_F(Cli, MineReportsAndResumes) {
  auto db = path("resume.db").string();
  auto first = run({"mine", repo(), db});
  ASSERT_EQ(first.code, 0) << first.err;
  auto report = nlohmann::json::parse(first.out);
  // the merge is stored as a commit even when its edits are not extracted
  EXPECT_EQ(report["commits_total"], fixture::main_history().commits().size());
  EXPECT_GT(report["commits_processed"].get<int>(), 0);
  EXPECT_NE(first.err.find("mined"), std::string::npos);

  auto second = run({"mine", repo(), db, "--quiet"});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(nlohmann::json::parse(second.out)["commits_processed"], 0);
  EXPECT_TRUE(second.err.empty());
}

TEST_F(Cli, FingerprintMismatchExitsThree) {
  auto db = path("fp.db").string();
  ASSERT_EQ(run({"mine", repo(), db, "--quiet"}).code, 0);
  auto r = run({"mine", repo(), db, "--use-blocks", "--quiet"});
  EXPECT_EQ(r.code, kExitFingerprint);
  EXPECT_NE(r.err.find("different configuration"), std::string::npos);
  // worker count is not part of the configuration
  EXPECT_EQ(run({"mine", repo(), db, "--numprocesses", "3", "--quiet"}).code, 0);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  auto db = mined_store();
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"graph", "pagerank", db, path("x.csv").string()}).code, kExitUsage);
  EXPECT_EQ(run({"graph", "coedit", db, path("x.csv").string(), "--format", "gexf"}).code, kExitUsage);
  EXPECT_EQ(run({"graph", "line_editing", db, path("x.csv").string()}).code, kExitUsage);
  EXPECT_EQ(run({"analyze", db, path("x.csv").string(), "--metrics", "pagerank"}).code, kExitUsage);
  EXPECT_EQ(run({"mine", repo(), path("y.db").string(), "--max-modifications", "0"}).code, kExitUsage);
  auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("mine"), std::string::npos);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  auto r = run({"mine", path("not-a-repo").string(), path("z.db").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("coedit: error:"), std::string::npos);
  EXPECT_EQ(run({"mine", repo(), path("z.db").string(), "--exclude", path("nope.txt").string()}).code,
            kExitFailure);
}

TEST_F(Cli, WorkerCountDoesNotChangeTheStore) {
  auto one = path("w1.db").string(), eight = path("w8.db").string();
  ASSERT_EQ(run({"mine", repo(), one, "--numprocesses", "1", "--quiet"}).code, 0);
  ASSERT_EQ(run({"mine", repo(), eight, "--numprocesses", "8", "--quiet"}).code, 0);
  auto a = run({"dump", one}), b = run({"dump", eight});
  ASSERT_EQ(a.code, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, GraphOutputEqualsLibraryOutput) {
  auto db = mined_store();
  auto store = Store::open_existing(db);
  auto repo_handle = open_repository(repo());

  struct Case {
    std::vector<std::string> extra;
    std::string type;
    std::vector<EdgeRow> rows;
    bool directed;
  };
  std::vector<EdgeRow> dag_rows;
  for (const auto &r : edge_rows(commit_dag(*store, "src/core.c"))) dag_rows.push_back(r);
  auto line_rows = edge_rows(line_editing_dag(*repo_handle, *store, "src/core.c", false, false));
  TimeRange week{fixture::kT0, fixture::kT0 + 7 * fixture::kDay};
  std::vector<Case> cases = {
      {{}, "coedit", edge_rows(temporal_coedit_edges(*store, WeightMode::Levenshtein, false)), true},
      {{"--weight", "line_count", "--self-loops"}, "coedit",
       edge_rows(temporal_coedit_edges(*store, WeightMode::LineCount, true)), true},
      {{"--window", std::to_string(fixture::kT0) + "," + std::to_string(fixture::kT0 + 7 * fixture::kDay)},
       "coedit", edge_rows(temporal_coedit_edges(*store, WeightMode::Levenshtein, false, week)), true},
      {{}, "coauthor", edge_rows(coauthorship_graph(*store)), false},
      {{}, "bipartite", edge_rows(bipartite_graph(*store)), true},
      {{"--file", "src/core.c"}, "commit_editing", dag_rows, true},
      {{"--file", "src/core.c", "--repo", repo()}, "line_editing", line_rows, true},
  };
  int k = 0;
  for (const auto &c : cases) {
    for (const char *fmt : {"csv", "html"}) {
      auto out = path("g" + std::to_string(k++) + "." + fmt);
      std::vector<std::string> args{"graph", c.type, db, out.string(), "--format", fmt};
      args.insert(args.end(), c.extra.begin(), c.extra.end());
      auto r = run(args);
      ASSERT_EQ(r.code, 0) << c.type << ": " << r.err;
      std::string want = std::string(fmt) == "csv" ? render_csv(c.rows) : render_html(c.rows, c.directed, c.type);
      EXPECT_EQ(slurp(out), want) << c.type << " " << fmt;
    }
  }
  auto coedit_csv = slurp(path("g0.csv"));
  EXPECT_EQ(std::count(coedit_csv.begin(), coedit_csv.end(), '\n'),
            static_cast<long>(cases[0].rows.size()) + 1);
}

TEST_F(Cli, AnalyzeAndFeaturesEqualLibraryOutput) {
  auto db = mined_store();
  auto store = Store::open_existing(db);
  WindowSpec spec{7 * fixture::kDay, 2 * fixture::kDay};

  auto r = run({"analyze", db, path("a.csv").string(), "--metrics",
                "num_developers,mean_out_degree,delta", "--window", "7", "--step", "2",
                "--plot", path("a.html").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto series = rolling_metrics(*store, spec, {Metric::NumDevelopers, Metric::MeanOutDegree});
  series.push_back(network_delta(*store, spec));
  EXPECT_EQ(slurp(path("a.csv")), render_series_csv(series));
  EXPECT_EQ(slurp(path("a.html")), render_series_html(series, "coedit metrics"));

  auto warn = run({"analyze", db, path("b.csv").string(), "--metrics", "own_foreign", "--window", "2",
                   "--step", "5"});
  ASSERT_EQ(warn.code, 0) << warn.err;
  EXPECT_NE(warn.err.find("warning"), std::string::npos);
  EXPECT_EQ(slurp(path("b.csv")),
            render_series_csv(own_foreign_split(*store, {2 * fixture::kDay, 5 * fixture::kDay},
                                                WeightMode::Levenshtein)
                                  .as_series()));

  auto f = run({"features", db, path("f.csv").string(), "--delta", "10", "--epsilon", "0", "--stats"});
  ASSERT_EQ(f.code, 0) << f.err;
  auto rows = clean_rows(compute_features(*store, {10 * 60, false}).rows, 0.0);
  EXPECT_EQ(slurp(path("f.csv")), render_feature_csv(rows));
  EXPECT_EQ(f.out, statistics_report_json(rows) + "\n");
  EXPECT_NE(f.err.find("rows"), std::string::npos);

  auto d = run({"dump", db, path("dump.csv").string()});
  ASSERT_EQ(d.code, 0);
  EXPECT_EQ(slurp(path("dump.csv")), store->dump());
}

TEST_F(Cli, InProcessEntryPointMatchesBinary) {
  auto db = mined_store();
  std::ostringstream out, err;
  EXPECT_EQ(run_cli({"dump", db}, out, err), 0);
  EXPECT_EQ(out.str(), run({"dump", db}).out);
  std::ostringstream o2, e2;
  EXPECT_EQ(run_cli({"graph"}, o2, e2), kExitUsage);
  EXPECT_TRUE(o2.str().empty());
  EXPECT_NE(e2.str().find("usage error"), std::string::npos);
}
