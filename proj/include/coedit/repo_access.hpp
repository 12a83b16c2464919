#pragma once

#include "coedit/process.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace coedit {

using Timestamp = std::int64_t; // UTC seconds

struct CommitMeta {
  std::string hash;
  std::string author_name;
  std::string author_email;
  std::string committer_name;
  std::string committer_email;
  Timestamp author_time = 0;
  Timestamp committer_time = 0;
  std::vector<std::string> parent_hashes;
  bool is_merge = false;
  std::set<std::string> branches;
  // position in the parent-first ordering returned by list_commits
  std::int64_t topo_index = 0;
};

enum class ChangeType { Added, Deleted, Modified, Renamed };

const char *to_string(ChangeType t);
ChangeType change_type_from_string(const std::string &s);

struct FileModification {
  std::optional<std::string> old_path;
  std::optional<std::string> new_path;
  ChangeType change_type = ChangeType::Modified;
  std::string diff; // zero-context unified diff, empty for binary files
  int pre_line_count = 0;
  int post_line_count = 0;
  bool binary = false;
  // parent the diff was computed against; empty for a root commit
  std::string parent_hash;

  const std::string &path() const { return new_path ? *new_path : *old_path; }
};

struct LineAttribution {
  int line_number = 0;
  std::string origin_commit;
  std::string origin_author_name;
  std::string origin_author_email;
  Timestamp origin_author_time = 0;
  // path and 1-based line of the line in origin_commit
  std::string origin_path;
  int origin_line = 0;
  std::string content;
};

/// Read-only view of one on-disk repository. A handle may be shared between
/// threads; each git invocation is an independent subprocess and the blob
/// reader is serialised internally.
class RepositoryHandle {
public:
  const std::filesystem::path &path() const { return path_; }

  std::vector<CommitMeta> list_commits(bool include_merges) const;
  /// Single-commit lookup; `branches` is only filled by list_commits.
  CommitMeta commit(const std::string &rev) const;

  /// One entry per changed file; merge commits yield one set per parent,
  /// each tagged with FileModification::parent_hash.
  std::vector<FileModification> get_modifications(const CommitMeta &commit,
                                                  bool text_binary = false) const;

  /// Modifications against a single parent (empty parent = root commit).
  std::vector<FileModification> diff_against(const std::string &parent,
                                             const std::string &commit,
                                             bool text_binary = false) const;

  std::vector<LineAttribution> blame(const std::string &commit, const std::string &path,
                                     bool detect_moves, bool detect_copies) const;

  /// Lines of the file at `commit` after lossy UTF-8 decoding. Throws
  /// Error(BinaryContent) when a NUL byte occurs in the first 8000 bytes.
  std::vector<std::string> file_content(const std::string &commit,
                                        const std::string &path) const;

  /// Raw blob bytes; nullopt when the path does not exist at commit.
  std::optional<std::string> raw_blob(const std::string &commit,
                                      const std::string &path) const;

  ~RepositoryHandle();
  RepositoryHandle(const RepositoryHandle &) = delete;
  RepositoryHandle &operator=(const RepositoryHandle &) = delete;

private:
  friend std::shared_ptr<RepositoryHandle> open_repository(const std::string &);
  RepositoryHandle(std::filesystem::path path, std::optional<std::filesystem::path> temp);

  ProcessResult git(const std::vector<std::string> &args) const;
  std::string git_checked(const std::vector<std::string> &args) const;
  std::optional<std::string> read_object(const std::string &spec) const;

  std::filesystem::path path_;
  std::optional<std::filesystem::path> temp_dir_;
  mutable std::mutex batch_mutex_;
  mutable std::unique_ptr<PipedProcess> batch_;
};

using RepositoryPtr = std::shared_ptr<RepositoryHandle>;

/// Opens a local repository, or clones `location` into a temporary directory
/// when it looks like a URL. The temporary clone is removed with the handle.
RepositoryPtr open_repository(const std::string &location);

bool is_binary_blob(std::string_view bytes);

/// Byte-faithful split on '\n'; a final line without newline is kept, a
/// trailing newline does not produce an empty last line.
std::vector<std::string> split_text_lines(std::string_view bytes);

/// Maps author emails onto canonical identities. File format: one mapping
/// per line, `from_email -> to_email`; '#' starts a comment.
class AliasMap {
public:
  AliasMap() = default;
  static AliasMap load(const std::filesystem::path &file);
  static AliasMap parse(std::string_view text);

  /// Identity key for an author: lowercased email after alias resolution.
  std::string identity(const std::string &email) const;
  std::string digest() const;
  bool empty() const { return map_.empty(); }

private:
  std::map<std::string, std::string> map_;
};

} // namespace coedit
