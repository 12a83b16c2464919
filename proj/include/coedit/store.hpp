#pragma once

#include "coedit/core.hpp"
#include "coedit/repo_access.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

struct sqlite3;

namespace coedit {

inline constexpr int kSchemaVersion = 1;

struct EditRecord {
  std::string modifying_commit;
  std::string original_commit;
  std::optional<std::string> path_pre;
  std::optional<std::string> path_post;
  std::optional<int> pre_line_start;
  std::optional<int> post_line_start;
  int num_pre_lines = 0;
  int num_post_lines = 0;
  EditType edit_type = EditType::Replacement;
  Granularity granularity = Granularity::Line;
  std::optional<std::int64_t> levenshtein;
  std::optional<double> entropy_pre;
  std::optional<double> entropy_post;
  std::string original_author;
  std::string modifying_author;
  Timestamp timestamp = 0;          // author_time of modifying_commit
  Timestamp original_timestamp = 0; // author_time of original_commit
  std::optional<std::string> merge_parent;
  std::optional<int> file_total_lines;
  std::optional<int> file_cyclomatic;

  // Where the (first) replaced line came from according to blame; lets the
  // line-editing DAG follow a lineage across renames and copies.
  std::optional<std::string> original_path;
  std::optional<int> original_line;

  std::string pre_text;  // "\n"-joined
  std::string post_text; // "\n"-joined
  bool pre_blank = false;  // every pre line is whitespace-only (vacuous if none)
  bool post_blank = false;

  // A parent line the merge did not adopt. Kept so line lineages end at the
  // merge, but never treated as a co-edit.
  bool merge_discard = false;

  bool operator==(const EditRecord &) const = default;

  const std::string &path() const { return path_post ? *path_post : *path_pre; }
};

enum class CommitStatus { Processed, Skipped };

const char *to_string(CommitStatus s);

struct CommitRecord {
  CommitMeta meta;
  std::string author_id; // identity key after alias resolution
  CommitStatus status = CommitStatus::Processed;
  std::string skip_reason; // too_many_files | binary_only | extraction_error
  std::string detail;      // free-form diagnostic for skipped commits
  int num_modifications = 0;
};

struct ModificationRecord {
  std::string commit;
  std::string parent; // empty for a root commit
  std::optional<std::string> old_path;
  std::optional<std::string> new_path;
  ChangeType change_type = ChangeType::Modified;
  std::string author_id;
  Timestamp timestamp = 0;
  int pre_line_count = 0;
  int post_line_count = 0;
  int num_edits = 0;

  const std::string &path() const { return new_path ? *new_path : *old_path; }
  bool operator==(const ModificationRecord &) const = default;
};

struct TimeRange {
  std::optional<Timestamp> start; // inclusive
  std::optional<Timestamp> end;   // exclusive

  bool contains(Timestamp t) const {
    return (!start || t >= *start) && (!end || t < *end);
  }
};

struct EditFilter {
  TimeRange time;
  // matches when either the modifying or the original author is listed
  std::set<std::string> authors;
  // matches path_pre or path_post
  std::set<std::string> paths;
  std::set<EditType> edit_types;
  std::optional<Granularity> granularity;
};

/// Single-file SQLite store. One connection per handle, all calls are
/// serialised by an internal mutex so a handle may be shared by threads.
class Store {
public:
  /// Creates the schema when absent; otherwise the stored fingerprint must
  /// equal `config_fingerprint` (Error FingerprintMismatch).
  static std::unique_ptr<Store> init(const std::filesystem::path &path,
                                     const std::string &config_fingerprint,
                                     const std::string &config_description = {});

  /// Opens an existing store without checking the fingerprint.
  static std::unique_ptr<Store> open_existing(const std::filesystem::path &path);

  ~Store();
  Store(const Store &) = delete;
  Store &operator=(const Store &) = delete;

  std::string fingerprint() const;
  std::string config_description() const;

  /// Atomic per commit. A commit already present is left untouched.
  /// Returns false for such a duplicate.
  bool write_commit_result(const CommitRecord &commit,
                           const std::vector<ModificationRecord> &modifications,
                           const std::vector<EditRecord> &edits);

  bool is_processed(const std::string &hash) const;
  std::set<std::string> processed_commits() const;
  std::set<std::string> unprocessed_commits(const std::vector<std::string> &all) const;

  std::vector<EditRecord> query_edits(const EditFilter &filter = {}) const;
  std::vector<CommitRecord> commits() const; // ordered by topo_index
  std::vector<ModificationRecord> modifications(const TimeRange &range = {}) const;

  std::size_t edit_count() const;

  /// Canonical, sorted CSV rendering of every table.
  std::string dump() const;

  /// Test hook: invoked inside the write transaction after the edit rows
  /// are inserted and before the commit row. Throwing aborts the write.
  void set_fault_hook(std::function<void()> hook);

private:
  Store(sqlite3 *db);
  void exec(const char *sql) const;
  std::string meta_value(const std::string &key) const;

  sqlite3 *db_;
  mutable std::mutex mutex_;
  std::function<void()> fault_hook_;
};

} // namespace coedit
