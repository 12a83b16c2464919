#include "coedit/cli.hpp"

#include "coedit/analytics.hpp"
#include "coedit/error.hpp"
#include "coedit/miner.hpp"
#include "coedit/networks.hpp"
#include "coedit/productivity.hpp"
#include "coedit/store.hpp"
#include "coedit/util.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <set>
#include <ostream>
#include <sstream>

namespace coedit {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Timestamp require_time(const std::string &flag, const std::string &value) {
  auto t = parse_time(value);
  if (!t) throw UsageError(flag + ": cannot parse time '" + value + "'");
  return *t;
}

TimeRange make_range(const std::string &since, const std::string &until, const std::string &window) {
  TimeRange r;
  std::string s = since, u = until;
  if (!window.empty()) {
    auto comma = window.find(',');
    if (comma == std::string::npos) throw UsageError("--window expects START,END");
    s = window.substr(0, comma);
    u = window.substr(comma + 1);
  }
  if (!s.empty()) r.start = require_time("--since", s);
  if (!u.empty()) r.end = require_time("--until", u);
  return r;
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  f << content;
  if (!f) throw Error(ErrorKind::InvalidArgument, "write failed for " + path);
}

std::vector<std::string> split_list(const std::vector<std::string> &items) {
  std::vector<std::string> out;
  for (const auto &item : items) {
    std::stringstream ss(item);
    for (std::string part; std::getline(ss, part, ',');)
      if (!trim(part).empty()) out.emplace_back(trim(part));
  }
  return out;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Co-editing network miner for git repositories", "coedit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // mine
  auto *mine_cmd = app.add_subcommand("mine", "Extract co-edits from a repository into a store");
  std::string repo_path, db_path, exclude_file, alias_file, report_file;
  bool use_blocks = false, extract_merges = false, detect_moves = false, detect_copies = false;
  bool no_skip_binary = false, no_file_metrics = false, quiet = false;
  unsigned numprocesses = 0;
  int max_mods = 1000;
  mine_cmd->add_option("repo", repo_path, "Repository path or clone URL")->required();
  mine_cmd->add_option("database", db_path, "Store file")->required();
  mine_cmd->add_option("--exclude", exclude_file, "File listing paths or globs to exclude");
  mine_cmd->add_flag("--use-blocks", use_blocks, "Block-based instead of line-based matching");
  mine_cmd->add_option("--numprocesses", numprocesses, "Worker count (0 = all cores)");
  mine_cmd->add_flag("--extract-merges", extract_merges, "Mine edits made in merge commits");
  mine_cmd->add_option("--max-modifications", max_mods, "Skip commits touching more files")
      ->check(CLI::PositiveNumber);
  mine_cmd->add_flag("--detect-moves", detect_moves, "Blame with move detection");
  mine_cmd->add_flag("--detect-copies", detect_copies, "Blame with cross-file copy detection");
  mine_cmd->add_flag("--no-skip-binary", no_skip_binary, "Diff binary files as text");
  mine_cmd->add_flag("--no-file-metrics", no_file_metrics, "Do not record file size and complexity");
  mine_cmd->add_option("--aliases", alias_file, "Author alias map (from_email -> to_email)");
  mine_cmd->add_option("--report", report_file, "Write the JSON report here instead of stdout");
  mine_cmd->add_flag("--quiet", quiet, "No progress output");

  // graph
  auto *graph_cmd = app.add_subcommand("graph", "Project a store into a network");
  std::string graph_type, graph_db, graph_out, format = "csv", weight = "levenshtein";
  std::string since, until, window, dag_file, dag_repo;
  bool self_loops = false;
  graph_cmd->add_option("type", graph_type, "coedit | coauthor | bipartite | line_editing | commit_editing")
      ->required()
      ->check(CLI::IsMember({"coedit", "coauthor", "bipartite", "line_editing", "commit_editing"}));
  graph_cmd->add_option("database", graph_db, "Store file")->required();
  graph_cmd->add_option("output", graph_out, "Output file")->required();
  graph_cmd->add_option("--format", format, "csv | html")->check(CLI::IsMember({"csv", "html"}));
  graph_cmd->add_option("--weight", weight, "levenshtein | line_count")
      ->check(CLI::IsMember({"levenshtein", "line_count"}));
  graph_cmd->add_flag("--self-loops", self_loops, "Keep edits of one's own code");
  graph_cmd->add_option("--since", since, "Window start (inclusive), seconds or YYYY-MM-DD");
  graph_cmd->add_option("--until", until, "Window end (exclusive)");
  graph_cmd->add_option("--window", window, "START,END shorthand for --since/--until");
  graph_cmd->add_option("--file", dag_file, "Restrict DAGs to one file");
  graph_cmd->add_option("--repo", dag_repo, "Repository (needed for line_editing)");
  bool dag_moves = false, dag_copies = false;
  graph_cmd->add_flag("--detect-moves", dag_moves, "Track moved lines (line_editing)");
  graph_cmd->add_flag("--detect-copies", dag_copies, "Track copied lines (line_editing)");

  // analyze
  auto *analyze_cmd = app.add_subcommand("analyze", "Rolling-window metrics");
  std::string an_db, an_out, plot_file, an_weight = "levenshtein";
  std::vector<std::string> metrics_arg;
  double window_days = 365, step_days = 30;
  analyze_cmd->add_option("database", an_db, "Store file")->required();
  analyze_cmd->add_option("output", an_out, "CSV output")->required();
  analyze_cmd->add_option("--metrics", metrics_arg,
                          "num_developers,num_unique_edges,mean_out_degree,degree_centralisation,"
                          "delta,own_foreign")
      ->required();
  analyze_cmd->add_option("--window", window_days, "Window length in days")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--step", step_days, "Step in days")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--weight", an_weight, "Weight for own_foreign")
      ->check(CLI::IsMember({"levenshtein", "line_count"}));
  analyze_cmd->add_option("--plot", plot_file, "Also write an HTML chart");

  // features
  auto *features_cmd = app.add_subcommand("features", "Contribution feature table");
  std::string ft_db, ft_out, stats_out;
  double delta_min = 5, epsilon_pct = 5;
  bool drop_initial = false, stats = false;
  features_cmd->add_option("database", ft_db, "Store file")->required();
  features_cmd->add_option("output", ft_out, "CSV output")->required();
  features_cmd->add_option("--delta", delta_min, "Aggregation gap in minutes")->check(CLI::NonNegativeNumber);
  features_cmd->add_option("--epsilon", epsilon_pct, "Drop top PCT percent by productivity")
      ->check(CLI::Range(0.0, 99.999));
  features_cmd->add_flag("--drop-initial-commit", drop_initial, "Ignore edits of lines from the first commit");
  features_cmd->add_flag("--stats", stats, "Print a statistics report (JSON) to stdout");
  features_cmd->add_option("--stats-out", stats_out, "Write the statistics report to a file");

  // dump
  auto *dump_cmd = app.add_subcommand("dump", "Canonical CSV dump of a store");
  std::string dump_db, dump_out;
  dump_cmd->add_option("database", dump_db, "Store file")->required();
  dump_cmd->add_option("output", dump_out, "Output file (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "coedit: usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*mine_cmd) {
      MiningConfig config;
      config.use_blocks = use_blocks;
      config.num_workers = numprocesses;
      config.max_modifications = max_mods;
      config.extract_merges = extract_merges;
      config.detect_moves = detect_moves;
      config.detect_copies = detect_copies;
      config.skip_binary = !no_skip_binary;
      config.file_metrics = !no_file_metrics;
      if (!exclude_file.empty()) config.exclude_paths = load_exclusions(exclude_file);
      if (!alias_file.empty()) config.aliases = AliasMap::load(alias_file);
      validate(config);

      auto repo = open_repository(repo_path);
      auto store = Store::init(db_path, config_fingerprint(config), config_description(config));
      MiningOptions opts;
      g_interrupted = false;
      opts.cancel = &g_interrupted;
      if (!quiet) {
        opts.progress = [&err](std::size_t done, std::size_t total) {
          if (done == total || done % 25 == 0) err << "mined " << done << "/" << total << "\n";
        };
      }
      auto previous = std::signal(SIGINT, on_sigint);
      MiningReport report;
      try {
        report = mine(*repo, *store, config, opts);
      } catch (...) {
        std::signal(SIGINT, previous);
        throw;
      }
      std::signal(SIGINT, previous);
      if (!report_file.empty()) write_file(report_file, report.to_json() + "\n");
      else out << report.to_json() << "\n";
      if (!quiet)
        err << report.commits_processed << " commits processed, " << report.commits_skipped.size()
            << " skipped, " << report.edits_written << " edits\n";
      return report.interrupted ? kExitFailure : kExitOk;
    }

    if (*graph_cmd) {
      auto store = Store::open_existing(graph_db);
      auto range = make_range(since, until, window);
      auto fmt = export_format_from_string(format);
      auto mode = weight_mode_from_string(weight);
      std::vector<EdgeRow> rows;
      bool directed = true;
      if (graph_type == "coedit") {
        rows = edge_rows(temporal_coedit_edges(*store, mode, self_loops, range));
      } else if (graph_type == "coauthor") {
        rows = edge_rows(coauthorship_graph(*store, range));
        directed = false;
      } else if (graph_type == "bipartite") {
        rows = edge_rows(bipartite_graph(*store, range));
      } else {
        std::vector<std::string> files;
        if (!dag_file.empty()) files.push_back(dag_file);
        else
          for (const auto &f : edited_files(*store)) files.push_back(f);
        if (graph_type == "commit_editing") {
          std::set<std::pair<std::string, std::string>> seen;
          for (const auto &f : files)
            for (const auto &r : edge_rows(commit_dag(*store, f)))
              if (seen.insert({r.source, r.target}).second) rows.push_back(r);
        } else {
          if (dag_repo.empty()) throw UsageError("line_editing needs --repo");
          auto repo = open_repository(dag_repo);
          std::set<std::string> done_ids;
          for (const auto &f : files) {
            auto dags = line_editing_dag(*repo, *store, f, dag_moves, dag_copies);
            for (const auto &r : edge_rows(dags))
              if (done_ids.insert(r.source + "\n" + r.target).second) rows.push_back(r);
          }
        }
      }
      export_graph(rows, directed, fmt, graph_out, graph_type);
      return kExitOk;
    }

    if (*analyze_cmd) {
      auto store = Store::open_existing(an_db);
      WindowSpec spec;
      spec.window_length = static_cast<Timestamp>(window_days * 86400);
      spec.step = static_cast<Timestamp>(step_days * 86400);
      if (auto warning = check_window_spec(spec)) err << "coedit: warning: " << *warning << "\n";
      std::vector<MetricSeries> series;
      std::vector<Metric> network_metrics;
      bool want_delta = false, want_split = false;
      for (const auto &m : split_list(metrics_arg)) {
        if (m == "delta") want_delta = true;
        else if (m == "own_foreign") want_split = true;
        else {
          try {
            network_metrics.push_back(metric_from_string(m));
          } catch (const Error &e) {
            throw UsageError(e.what());
          }
        }
      }
      if (!network_metrics.empty()) series = rolling_metrics(*store, spec, network_metrics);
      if (want_delta) series.push_back(network_delta(*store, spec));
      if (want_split) {
        auto split = own_foreign_split(*store, spec, weight_mode_from_string(an_weight)).as_series();
        series.insert(series.end(), split.begin(), split.end());
      }
      write_file(an_out, render_series_csv(series));
      if (!plot_file.empty()) write_file(plot_file, render_series_html(series, "coedit metrics"));
      return kExitOk;
    }

    if (*features_cmd) {
      auto store = Store::open_existing(ft_db);
      FeatureOptions fo;
      fo.delta = static_cast<Timestamp>(delta_min * 60);
      fo.drop_initial_commit = drop_initial;
      auto report = compute_features(*store, fo);
      auto rows = clean_rows(report.rows, epsilon_pct / 100.0);
      export_feature_table(rows, ft_out);
      if (stats || !stats_out.empty()) {
        std::string json = statistics_report_json(rows);
        if (!stats_out.empty()) write_file(stats_out, json + "\n");
        if (stats) out << json << "\n";
      }
      err << rows.size() << " rows (" << report.rows.size() - rows.size() << " removed as outliers, "
          << report.rows_first_contribution << " first contributions dropped)\n";
      return kExitOk;
    }

    if (*dump_cmd) {
      auto store = Store::open_existing(dump_db);
      if (dump_out.empty()) out << store->dump();
      else write_file(dump_out, store->dump());
      return kExitOk;
    }
  } catch (const UsageError &e) {
    err << "coedit: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    err << "coedit: error: " << e.what() << "\n";
    return e.kind() == ErrorKind::FingerprintMismatch ? kExitFingerprint : kExitFailure;
  } catch (const std::exception &e) {
    err << "coedit: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

} // namespace coedit
