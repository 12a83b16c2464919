#include "coedit/miner.hpp"

#include "coedit/core.hpp"
#include "coedit/cyclomatic.hpp"
#include "coedit/error.hpp"
#include "coedit/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fnmatch.h>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace coedit {

std::string config_description(const MiningConfig &c) {
  auto patterns = c.exclude_paths;
  std::sort(patterns.begin(), patterns.end());
  patterns.erase(std::unique(patterns.begin(), patterns.end()), patterns.end());
  std::string joined;
  for (const auto &p : patterns) joined += p + "\n";
  std::ostringstream out;
  out << "granularity=" << (c.use_blocks ? "block" : "line")
      << ";extract_merges=" << c.extract_merges << ";skip_binary=" << c.skip_binary
      << ";max_modifications=" << c.max_modifications << ";detect_moves=" << c.detect_moves
      << ";detect_copies=" << c.detect_copies << ";file_metrics=" << c.file_metrics
      << ";exclusions=" << fnv1a_hex(joined) << ";aliases=" << c.aliases.digest();
  return out.str();
}

std::string config_fingerprint(const MiningConfig &c) {
  return fnv1a_hex("schema=" + std::to_string(kSchemaVersion) + ";" + config_description(c));
}

void validate(const MiningConfig &c) {
  if (c.max_modifications < 1)
    throw Error(ErrorKind::InvalidArgument, "max_modifications must be at least 1");
  for (const auto &p : c.exclude_paths) {
    if (p.empty()) throw Error(ErrorKind::InvalidArgument, "empty exclusion pattern");
    int depth = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == '\\') {
        ++i;
      } else if (p[i] == '[') {
        ++depth;
      } else if (p[i] == ']' && depth > 0) {
        --depth;
      }
    }
    if (depth != 0)
      throw Error(ErrorKind::InvalidArgument, "malformed glob '" + p + "': unbalanced '['");
  }
}

unsigned effective_workers(const MiningConfig &c) {
  if (c.num_workers > 0) return c.num_workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> load_exclusions(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read exclusion file " + file.string());
  std::vector<std::string> patterns;
  for (std::string line; std::getline(in, line);) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto t = trim(line);
    if (!t.empty()) patterns.emplace_back(t);
  }
  return patterns;
}

bool path_excluded(const std::string &path, const std::vector<std::string> &patterns) {
  for (const auto &p : patterns) {
    if (p.back() == '/') {
      if (path.rfind(p, 0) == 0) return true;
      continue;
    }
    bool glob = p.find_first_of("*?[") != std::string::npos;
    if (glob) {
      if (::fnmatch(p.c_str(), path.c_str(), 0) == 0) return true;
      if (p.find('/') == std::string::npos) {
        auto slash = path.rfind('/');
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        if (::fnmatch(p.c_str(), base.c_str(), 0) == 0) return true;
      }
      continue;
    }
    if (path == p || path.rfind(p + "/", 0) == 0) return true;
  }
  return false;
}

std::vector<FileModification> apply_exclusions(std::vector<FileModification> mods,
                                               const std::vector<std::string> &patterns) {
  if (patterns.empty()) return mods;
  std::erase_if(mods, [&](const FileModification &m) {
    return (m.old_path && path_excluded(*m.old_path, patterns)) ||
           (m.new_path && path_excluded(*m.new_path, patterns));
  });
  return mods;
}

namespace {

bool all_blank(const std::vector<NumberedLine> &lines) {
  return std::all_of(lines.begin(), lines.end(),
                     [](const NumberedLine &l) { return trim(l.text).empty(); });
}

const LineAttribution &attribution(const std::vector<LineAttribution> &blame, int line,
                                   const std::string &path) {
  if (line < 1 || static_cast<std::size_t>(line) > blame.size() ||
      blame[static_cast<std::size_t>(line - 1)].line_number != line)
    throw Error(ErrorKind::MalformedDiff,
                "diff line " + std::to_string(line) + " of " + path + " outside blamed file");
  return blame[static_cast<std::size_t>(line - 1)];
}

// The origin owning most of the replaced lines; ties go to the earliest line.
const LineAttribution &dominant_origin(const std::vector<LineAttribution> &blame,
                                       const std::vector<NumberedLine> &pre,
                                       const std::string &path) {
  std::map<std::string, int> votes;
  for (const auto &l : pre) ++votes[attribution(blame, l.number, path).origin_commit];
  const LineAttribution *best = nullptr;
  int best_votes = 0;
  for (const auto &l : pre) {
    const auto &a = attribution(blame, l.number, path);
    int v = votes[a.origin_commit];
    if (v > best_votes) {
      best = &a;
      best_votes = v;
    }
  }
  return *best;
}

std::vector<EditRecord> extract_file(const RepositoryHandle &repo, const CommitMeta &commit,
                                     const FileModification &mod, const MiningConfig &config) {
  auto hunks = parse_diff(mod.diff);
  if (hunks.empty()) return {};

  const std::string modifying = config.aliases.identity(commit.author_email);

  std::vector<LineAttribution> pre_blame;
  bool any_deleted = std::any_of(hunks.begin(), hunks.end(),
                                 [](const Hunk &h) { return !h.deleted.empty(); });
  if (any_deleted)
    pre_blame = repo.blame(mod.parent_hash, *mod.old_path, config.detect_moves, config.detect_copies);

  if (commit.is_merge) {
    // Lines the merge took over from a parent are not the merge author's
    // work; only lines blame attributes to the merge itself are kept.
    bool any_added = std::any_of(hunks.begin(), hunks.end(),
                                 [](const Hunk &h) { return !h.added.empty(); });
    if (any_added) {
      auto post_blame =
          repo.blame(commit.hash, *mod.new_path, config.detect_moves, config.detect_copies);
      for (auto &h : hunks) {
        std::erase_if(h.added, [&](const NumberedLine &l) {
          return attribution(post_blame, l.number, *mod.new_path).origin_commit != commit.hash;
        });
      }
    }
    std::erase_if(hunks, [](const Hunk &h) { return h.deleted.empty() && h.added.empty(); });
  }

  std::vector<EditRecord> records;
  for (const auto &h : hunks) {
    auto events = config.use_blocks ? match_blocks(h) : match_lines(h);
    for (auto &ev : events) {
      EditRecord r;
      r.modifying_commit = commit.hash;
      r.path_pre = mod.old_path;
      r.path_post = mod.new_path;
      r.edit_type = ev.edit_type;
      r.granularity = ev.granularity;
      r.levenshtein = ev.levenshtein;
      r.entropy_pre = ev.entropy_pre;
      r.entropy_post = ev.entropy_post;
      r.num_pre_lines = static_cast<int>(ev.pre_lines.size());
      r.num_post_lines = static_cast<int>(ev.post_lines.size());
      if (!ev.pre_lines.empty()) r.pre_line_start = ev.pre_lines.front().number;
      if (!ev.post_lines.empty()) r.post_line_start = ev.post_lines.front().number;
      r.pre_text = join_lines(ev.pre_lines);
      r.post_text = join_lines(ev.post_lines);
      r.pre_blank = all_blank(ev.pre_lines);
      r.post_blank = all_blank(ev.post_lines);
      r.modifying_author = modifying;
      r.timestamp = commit.author_time;
      if (commit.is_merge) r.merge_parent = mod.parent_hash;

      if (ev.pre_lines.empty()) {
        r.original_commit = commit.hash;
        r.original_author = modifying;
        r.original_timestamp = commit.author_time;
        r.original_path = mod.new_path;
        r.original_line = r.post_line_start;
      } else {
        const auto &origin = dominant_origin(pre_blame, ev.pre_lines, *mod.old_path);
        r.original_commit = origin.origin_commit;
        r.original_author = config.aliases.identity(origin.origin_author_email);
        r.original_timestamp = origin.origin_author_time;
        r.original_path = origin.origin_path;
        r.original_line = origin.origin_line;
      }
      r.merge_discard = commit.is_merge && ev.edit_type == EditType::Deletion;
      records.push_back(std::move(r));
    }
  }

  if (config.file_metrics && mod.new_path && !records.empty()) {
    std::optional<int> cyc;
    if (language_for_path(*mod.new_path)) {
      if (auto blob = repo.raw_blob(commit.hash, *mod.new_path))
        cyc = cyclomatic_complexity(sanitize_utf8(*blob), *mod.new_path);
    }
    for (auto &r : records) {
      r.file_total_lines = mod.post_line_count;
      r.file_cyclomatic = cyc;
    }
  }
  return records;
}

} // namespace

CommitResult process_commit(const RepositoryHandle &repo, const CommitMeta &commit,
                            const MiningConfig &config) {
  CommitResult result;
  result.commit.meta = commit;
  result.commit.author_id = config.aliases.identity(commit.author_email);
  auto skip = [&](const std::string &reason, const std::string &detail) {
    result.commit.status = CommitStatus::Skipped;
    result.commit.skip_reason = reason;
    result.commit.detail = detail;
    result.modifications.clear();
    result.edits.clear();
  };

  if (commit.is_merge && !config.extract_merges) {
    result.commit.detail = "merge not extracted";
    return result;
  }

  try {
    auto mods = repo.get_modifications(commit, !config.skip_binary);
    std::set<std::string> paths;
    for (const auto &m : mods) paths.insert(m.path());
    result.commit.num_modifications = static_cast<int>(paths.size());
    if (static_cast<int>(paths.size()) > config.max_modifications) {
      skip("too_many_files", std::to_string(paths.size()) + " files modified");
      return result;
    }
    mods = apply_exclusions(std::move(mods), config.exclude_paths);
    if (config.skip_binary && !mods.empty() &&
        std::all_of(mods.begin(), mods.end(), [](const FileModification &m) { return m.binary; })) {
      skip("binary_only", std::to_string(mods.size()) + " binary files");
      return result;
    }

    for (const auto &mod : mods) {
      std::vector<EditRecord> edits;
      if (!(mod.binary && config.skip_binary)) {
        try {
          edits = extract_file(repo, commit, mod, config);
        } catch (const Error &e) {
          if (e.kind() != ErrorKind::GitFailure && e.kind() != ErrorKind::PathNotFound &&
              e.kind() != ErrorKind::BinaryContent)
            throw;
          result.warnings.push_back(commit.hash + " " + mod.path() + ": " + e.what());
          edits.clear();
        }
      }
      bool substantive = std::any_of(edits.begin(), edits.end(),
                                     [](const EditRecord &r) { return !r.merge_discard; });
      if (!commit.is_merge || substantive) {
        ModificationRecord m;
        m.commit = commit.hash;
        m.parent = mod.parent_hash;
        m.old_path = mod.old_path;
        m.new_path = mod.new_path;
        m.change_type = mod.change_type;
        m.author_id = result.commit.author_id;
        m.timestamp = commit.author_time;
        m.pre_line_count = mod.pre_line_count;
        m.post_line_count = mod.post_line_count;
        m.num_edits = static_cast<int>(edits.size());
        result.modifications.push_back(std::move(m));
      }
      result.edits.insert(result.edits.end(), std::make_move_iterator(edits.begin()),
                          std::make_move_iterator(edits.end()));
    }
  } catch (const Error &e) {
    skip("extraction_error", e.what());
  }
  return result;
}

std::vector<EditRecord> extract_commit(const RepositoryHandle &repo, const CommitMeta &commit,
                                       const MiningConfig &config) {
  return process_commit(repo, commit, config).edits;
}

std::string MiningReport::to_json() const {
  nlohmann::json j;
  j["commits_total"] = commits_total;
  j["commits_already_processed"] = commits_already_processed;
  j["commits_processed"] = commits_processed;
  j["edits_written"] = edits_written;
  j["wall_time"] = wall_time;
  j["interrupted"] = interrupted;
  auto skipped = nlohmann::json::array();
  for (const auto &s : commits_skipped)
    skipped.push_back({{"hash", s.hash}, {"reason", s.reason}, {"detail", s.detail}});
  j["commits_skipped"] = skipped;
  j["warnings"] = warnings;
  return j.dump(2);
}

namespace {

class ResultQueue {
public:
  explicit ResultQueue(std::size_t capacity) : capacity_(capacity) {}

  // false when the queue was closed while waiting
  bool push(CommitResult r) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(r));
    not_empty_.notify_one();
    return true;
  }

  std::optional<CommitResult> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || producers_ == 0; });
    if (items_.empty()) return std::nullopt;
    CommitResult r = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return r;
  }

  void add_producer() {
    std::lock_guard lock(mutex_);
    ++producers_;
  }
  void producer_done() {
    std::lock_guard lock(mutex_);
    --producers_;
    not_empty_.notify_all();
  }
  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    items_.clear();
    not_full_.notify_all();
    not_empty_.notify_all();
  }

private:
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
  std::deque<CommitResult> items_;
  std::size_t capacity_;
  int producers_ = 0;
  bool closed_ = false;
};

} // namespace

MiningReport mine(const RepositoryHandle &repo, Store &store, const MiningConfig &config,
                  const MiningOptions &options) {
  validate(config);
  if (store.fingerprint() != config_fingerprint(config))
    throw Error(ErrorKind::FingerprintMismatch, "store fingerprint does not match configuration");

  auto t0 = std::chrono::steady_clock::now();
  MiningReport report;
  auto commits = repo.list_commits(true);
  report.commits_total = commits.size();
  auto done = store.processed_commits();
  std::vector<CommitMeta> todo;
  for (auto &c : commits) {
    if (done.count(c.hash)) ++report.commits_already_processed;
    else todo.push_back(std::move(c));
  }

  std::size_t written = 0;
  auto should_stop = [&] {
    if (options.cancel && options.cancel->load()) return true;
    return options.stop_after && written >= *options.stop_after;
  };
  auto write = [&](CommitResult &r) {
    if (!store.write_commit_result(r.commit, r.modifications, r.edits)) return;
    ++written;
    if (r.commit.status == CommitStatus::Skipped) {
      report.commits_skipped.push_back({r.commit.meta.hash, r.commit.skip_reason, r.commit.detail});
    } else {
      ++report.commits_processed;
      report.edits_written += r.edits.size();
    }
    for (auto &w : r.warnings) report.warnings.push_back(std::move(w));
    if (options.progress) options.progress(written, todo.size());
  };

  unsigned workers = std::min<std::size_t>(effective_workers(config), std::max<std::size_t>(todo.size(), 1));
  if (workers <= 1) {
    for (const auto &c : todo) {
      if (should_stop()) {
        report.interrupted = true;
        break;
      }
      auto r = process_commit(repo, c, config);
      write(r);
    }
  } else {
    ResultQueue queue(2 * workers);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex error_mutex;
    std::exception_ptr worker_error;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      queue.add_producer();
      pool.emplace_back([&] {
        try {
          auto handle = open_repository(repo.path().string());
          while (!stop.load()) {
            std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) break;
            if (!queue.push(process_commit(*handle, todo[i], config))) break;
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!worker_error) worker_error = std::current_exception();
          stop = true;
        }
        queue.producer_done();
      });
    }
    std::exception_ptr writer_error;
    try {
      while (auto r = queue.pop()) {
        if (should_stop()) {
          report.interrupted = true;
          break;
        }
        write(*r);
      }
    } catch (...) {
      writer_error = std::current_exception();
    }
    stop = true;
    queue.close();
    for (auto &t : pool) t.join();
    if (writer_error) std::rethrow_exception(writer_error);
    if (worker_error) std::rethrow_exception(worker_error);
    if (!report.interrupted && should_stop() && written < todo.size()) report.interrupted = true;
  }

  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

} // namespace coedit
