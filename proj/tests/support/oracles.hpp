#pragma once

// Reference implementations used to check the library. None of them calls
// into the library's algorithms; they share only plain record types.

#include "coedit/store.hpp"
#include "fixture_repo.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

std::vector<char32_t> code_points(std::string_view s);

/// Textbook Wagner-Fischer table over code points.
long levenshtein_dp(std::string_view a, std::string_view b);
/// Iterative deepening over explicit edit scripts; only for short inputs.
long edit_script_search(std::string_view a, std::string_view b);

double shannon_entropy(std::string_view bytes);

struct OracleHunk {
  std::vector<int> pre;  // 1-based line numbers in the old version
  std::vector<int> post; // 1-based line numbers in the new version
};

/// Zero-context hunks from a longest common subsequence. Exact for inputs
/// whose lines are pairwise distinct (the fixtures guarantee it).
std::vector<OracleHunk> lcs_hunks(const fixture::Lines &pre, const fixture::Lines &post);
/// pairs (i, j) of matched 0-based line indices
std::vector<std::pair<int, int>> lcs_matches(const fixture::Lines &pre, const fixture::Lines &post);

struct Owner {
  std::string label; // commit that introduced the line
  std::string path;  // path in that commit
  int line = 0;      // line number in that commit's version
};

/// Per-commit, per-file line ownership following blame semantics: a line
/// matched against a parent inherits the parent's owner (parents tried in
/// order), every other line belongs to the commit itself.
class Ownership {
public:
  explicit Ownership(const fixture::History &history);
  const std::vector<Owner> &owners(const std::string &label, const std::string &path) const;

private:
  std::map<std::pair<std::string, std::string>, std::vector<Owner>> owners_;
};

struct ExpectOptions {
  bool use_blocks = false;
  bool extract_merges = false;
  bool file_metrics = true;
  /// commits the miner is expected to skip entirely (no records)
  std::vector<std::string> skipped_labels;
};

/// The EditRecord set mining the materialised history must produce.
std::vector<coedit::EditRecord> expected_edits(const fixture::History &history,
                                               const std::map<std::string, std::string> &hashes,
                                               const ExpectOptions &options);

/// One line per record with every field, sorted; handy for readable diffs.
std::vector<std::string> canonical(const std::vector<coedit::EditRecord> &records);

/// Complexity of the fixture C dialect: 1 + lines whose code starts with "if (".
int fixture_cyclomatic(const fixture::Lines &lines);

// ---- graphs ------------------------------------------------------------------

/// All maximal source-to-sink paths by plain recursion.
std::vector<std::vector<int>> all_paths(int n, const std::vector<std::pair<int, int>> &edges);
/// Path count by dynamic programming over a topological order.
long long count_paths(int n, const std::vector<std::pair<int, int>> &edges);

// ---- statistics ----------------------------------------------------------------

/// Exact one-sided p-value P(U >= u_obs) by enumerating all group assignments.
double exact_rank_sum_p(const std::vector<double> &own, const std::vector<double> &foreign);
std::vector<double> midranks(const std::vector<double> &v);
double pearson(const std::vector<double> &x, const std::vector<double> &y);

// ---- feature table -------------------------------------------------------------

struct DumpTables {
  std::map<std::string, std::vector<std::map<std::string, std::string>>> sections;
};
/// Parses the canonical dump into named sections of column->value rows.
DumpTables parse_dump(const std::string &dump);

/// Straight-line recomputation of the contribution features from a dump.
/// Each row maps column name -> value; author is kept as text.
struct OracleRow {
  std::string author;
  long long start_time = 0;
  std::map<std::string, double> values;
};
std::vector<OracleRow> recompute_features(const std::string &dump, long long delta_seconds,
                                          bool drop_initial_commit);

} // namespace oracle
