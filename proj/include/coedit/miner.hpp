#pragma once

#include "coedit/repo_access.hpp"
#include "coedit/store.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace coedit {

struct MiningConfig {
  std::vector<std::string> exclude_paths;
  bool use_blocks = false;
  unsigned num_workers = 1; // 0 = all cores
  int max_modifications = 1000;
  bool extract_merges = false;
  bool detect_moves = false;
  bool detect_copies = false;
  bool skip_binary = true;
  bool file_metrics = true;
  AliasMap aliases;
};

/// Canonical text covering every field that changes the store contents
/// (everything except num_workers).
std::string config_description(const MiningConfig &config);
std::string config_fingerprint(const MiningConfig &config);

/// Validates worker count and cutoff; throws InvalidArgument.
void validate(const MiningConfig &config);

unsigned effective_workers(const MiningConfig &config);

/// Reads an exclusion file: one pattern per line, '#' starts a comment.
std::vector<std::string> load_exclusions(const std::filesystem::path &file);

/// Pattern forms: "dir/" (prefix), "*.png" (glob, matched against the full
/// path and, when the pattern has no '/', against the file name), or a plain
/// path (the file itself or everything below it).
bool path_excluded(const std::string &path, const std::vector<std::string> &patterns);

std::vector<FileModification> apply_exclusions(std::vector<FileModification> modifications,
                                               const std::vector<std::string> &exclude_paths);

struct CommitResult {
  CommitRecord commit;
  std::vector<ModificationRecord> modifications;
  std::vector<EditRecord> edits;
  std::vector<std::string> warnings;
};

/// Full extraction for one commit, including the skip decision.
CommitResult process_commit(const RepositoryHandle &repo, const CommitMeta &commit,
                            const MiningConfig &config);

/// Edit records of one commit (empty for a skipped commit).
std::vector<EditRecord> extract_commit(const RepositoryHandle &repo, const CommitMeta &commit,
                                       const MiningConfig &config);

struct SkippedCommit {
  std::string hash;
  std::string reason;
  std::string detail;
};

struct MiningReport {
  std::size_t commits_total = 0;
  std::size_t commits_already_processed = 0;
  std::size_t commits_processed = 0;
  std::vector<SkippedCommit> commits_skipped;
  std::size_t edits_written = 0;
  double wall_time = 0.0; // seconds
  bool interrupted = false;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

struct MiningOptions {
  // (written, total) after every stored commit
  std::function<void(std::size_t, std::size_t)> progress;
  // stop cleanly after this many newly written commits
  std::optional<std::size_t> stop_after;
  // checked between commits; set from another thread or a signal handler
  const std::atomic<bool> *cancel = nullptr;
};

MiningReport mine(const RepositoryHandle &repo, Store &store, const MiningConfig &config,
                  const MiningOptions &options = {});

} // namespace coedit
