#include "coedit/repo_access.hpp"

#include "coedit/core.hpp"
#include "coedit/error.hpp"
#include "coedit/util.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace coedit {

namespace fs = std::filesystem;

const char *to_string(ChangeType t) {
  switch (t) {
  case ChangeType::Added: return "added";
  case ChangeType::Deleted: return "deleted";
  case ChangeType::Modified: return "modified";
  case ChangeType::Renamed: return "renamed";
  }
  return "?";
}

ChangeType change_type_from_string(const std::string &s) {
  if (s == "added") return ChangeType::Added;
  if (s == "deleted") return ChangeType::Deleted;
  if (s == "modified") return ChangeType::Modified;
  if (s == "renamed") return ChangeType::Renamed;
  throw Error(ErrorKind::InvalidArgument, "unknown change type '" + s + "'");
}

bool is_binary_blob(std::string_view bytes) {
  return bytes.substr(0, std::min<std::size_t>(bytes.size(), 8000)).find('\0') !=
         std::string_view::npos;
}

std::vector<std::string> split_text_lines(std::string_view bytes) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < bytes.size()) {
    auto nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(bytes.substr(start));
      break;
    }
    lines.emplace_back(bytes.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

namespace {

const std::map<std::string, std::string> &git_env() {
  static const std::map<std::string, std::string> env = {
      {"LC_ALL", "C"},
      {"GIT_TERMINAL_PROMPT", "0"},
      {"GIT_OPTIONAL_LOCKS", "0"},
      {"GIT_CONFIG_NOSYSTEM", "1"},
      {"GIT_PAGER", "cat"},
  };
  return env;
}

bool looks_like_url(const std::string &s) {
  return s.find("://") != std::string::npos || s.rfind("git@", 0) == 0 ||
         s.rfind("file:", 0) == 0;
}

// C-style unquoting of git path names ("a\tb", "\303\274")
std::string unquote_path(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::string(s);
  s = s.substr(1, s.size() - 2);
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c != '\\' || i + 1 >= s.size()) {
      out.push_back(c);
      continue;
    }
    char n = s[++i];
    switch (n) {
    case 'n': out.push_back('\n'); break;
    case 't': out.push_back('\t'); break;
    case 'a': out.push_back('\a'); break;
    case 'b': out.push_back('\b'); break;
    case 'f': out.push_back('\f'); break;
    case 'r': out.push_back('\r'); break;
    case 'v': out.push_back('\v'); break;
    default:
      if (n >= '0' && n <= '7' && i + 2 < s.size()) {
        int v = (n - '0') * 64 + (s[i + 1] - '0') * 8 + (s[i + 2] - '0');
        out.push_back(static_cast<char>(v));
        i += 2;
      } else {
        out.push_back(n);
      }
    }
  }
  return out;
}

struct RawEntry {
  std::string old_mode, new_mode, old_sha, new_sha;
  char status = 'M';
  std::string src_path, dst_path;
};

std::vector<RawEntry> parse_raw_z(const std::string &out) {
  std::vector<RawEntry> entries;
  std::size_t pos = 0;
  auto next_field = [&]() -> std::string {
    auto end = out.find('\0', pos);
    if (end == std::string::npos) end = out.size();
    std::string f = out.substr(pos, end - pos);
    pos = end + 1;
    return f;
  };
  while (pos < out.size()) {
    std::string meta = next_field();
    if (meta.empty()) continue;
    if (meta.front() != ':')
      throw Error(ErrorKind::GitFailure, "unexpected diff-tree output: " + meta);
    std::istringstream in(meta.substr(1));
    RawEntry e;
    std::string status;
    in >> e.old_mode >> e.new_mode >> e.old_sha >> e.new_sha >> status;
    e.status = status.empty() ? 'M' : status.front();
    e.src_path = next_field();
    if (e.status == 'R' || e.status == 'C')
      e.dst_path = next_field();
    else
      e.dst_path = e.src_path;
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<std::string> split_patch_sections(const std::string &patch) {
  std::vector<std::string> sections;
  std::size_t pos = 0;
  while (pos < patch.size()) {
    std::size_t start = patch.rfind("diff --git ", pos) == pos ? pos : patch.find("\ndiff --git ", pos);
    if (start == std::string::npos) break;
    if (start != pos) start += 1;
    std::size_t next = patch.find("\ndiff --git ", start + 1);
    std::size_t end = next == std::string::npos ? patch.size() : next + 1;
    sections.push_back(patch.substr(start, end - start));
    pos = end;
  }
  return sections;
}

int count_lines(const std::string &blob) {
  return static_cast<int>(split_text_lines(blob).size());
}

} // namespace

RepositoryHandle::RepositoryHandle(fs::path path, std::optional<fs::path> temp)
    : path_(std::move(path)), temp_dir_(std::move(temp)) {}

RepositoryHandle::~RepositoryHandle() {
  batch_.reset();
  if (temp_dir_) {
    std::error_code ec;
    fs::remove_all(*temp_dir_, ec);
  }
}

ProcessResult RepositoryHandle::git(const std::vector<std::string> &args) const {
  std::vector<std::string> argv = {"git", "-C", path_.string(), "-c", "core.quotePath=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, {}, git_env());
}

std::string RepositoryHandle::git_checked(const std::vector<std::string> &args) const {
  auto r = git(args);
  if (r.exit_code != 0) {
    std::string cmd;
    for (const auto &a : args) cmd += " " + a;
    throw Error(ErrorKind::GitFailure,
                "git" + cmd + " failed: " + std::string(trim(r.err)));
  }
  return std::move(r.out);
}

RepositoryPtr open_repository(const std::string &location) {
  std::optional<fs::path> temp;
  fs::path path;
  if (looks_like_url(location)) {
    std::string tmpl = (fs::temp_directory_path() / "coedit-clone-XXXXXX").string();
    if (!::mkdtemp(tmpl.data()))
      throw Error(ErrorKind::CloneFailed, "cannot create temporary directory");
    temp = fs::path(tmpl);
    path = *temp / "repo";
    auto r = run_process({"git", "clone", "--quiet", "--no-checkout", location, path.string()},
                         {}, git_env());
    if (r.exit_code != 0) {
      std::error_code ec;
      fs::remove_all(*temp, ec);
      throw Error(ErrorKind::CloneFailed,
                  "cannot clone " + location + ": " + std::string(trim(r.err)));
    }
  } else {
    std::error_code ec;
    path = fs::weakly_canonical(fs::path(location), ec);
    if (ec || !fs::is_directory(path))
      throw Error(ErrorKind::NotARepository, location + " is not a directory");
  }

  // refuse to pick up an enclosing repository of a plain directory
  auto env = git_env();
  env["GIT_CEILING_DIRECTORIES"] = path.parent_path().string();
  auto r = run_process({"git", "-C", path.string(), "rev-parse", "--is-bare-repository",
                        "--show-prefix"},
                       {}, env);
  std::istringstream lines(r.out);
  std::string bare, prefix;
  std::getline(lines, bare);
  std::getline(lines, prefix);
  if (r.exit_code != 0 || (bare == "false" && !prefix.empty()))
    throw Error(ErrorKind::NotARepository, location + " is not a git repository");
  return RepositoryPtr(new RepositoryHandle(path, temp));
}

namespace {

constexpr const char *kLogFormat = "--format=%H%x00%an%x00%ae%x00%cn%x00%ce%x00%at%x00%ct%x00%P%x1e";

CommitMeta parse_log_record(std::string_view rec) {
  std::vector<std::string> f;
  std::size_t pos = 0;
  while (f.size() < 8) {
    auto end = rec.find('\0', pos);
    if (end == std::string_view::npos) end = rec.size();
    f.emplace_back(rec.substr(pos, end - pos));
    pos = end + 1;
    if (end == rec.size()) break;
  }
  if (f.size() != 8) throw Error(ErrorKind::GitFailure, "malformed git log record");
  CommitMeta c;
  c.hash = std::string(trim(f[0]));
  c.author_name = f[1];
  c.author_email = f[2];
  c.committer_name = f[3];
  c.committer_email = f[4];
  c.author_time = std::stoll(f[5]);
  c.committer_time = std::stoll(f[6]);
  std::istringstream parents(f[7]);
  for (std::string p; parents >> p;) c.parent_hashes.push_back(p);
  c.is_merge = c.parent_hashes.size() >= 2;
  return c;
}

} // namespace

std::vector<CommitMeta> RepositoryHandle::list_commits(bool include_merges) const {
  std::string out = git_checked(
      {"log", "--branches", "--tags", "--remotes", "--topo-order", "--reverse", kLogFormat});
  std::vector<CommitMeta> commits;
  std::size_t pos = 0;
  while (pos < out.size()) {
    auto end = out.find('\x1e', pos);
    if (end == std::string::npos) end = out.size();
    std::string_view rec(out.data() + pos, end - pos);
    pos = end + 1;
    while (!rec.empty() && rec.front() == '\n') rec.remove_prefix(1);
    if (trim(rec).empty()) continue;
    commits.push_back(parse_log_record(rec));
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    commits[i].topo_index = static_cast<std::int64_t>(i);
    index[commits[i].hash] = i;
  }

  std::string refs = git_checked({"for-each-ref", "--format=%(refname)%00%(refname:short)%00%(symref)",
                                  "refs/heads", "refs/remotes"});
  std::istringstream ref_lines(refs);
  for (std::string line; std::getline(ref_lines, line);) {
    auto a = line.find('\0');
    if (a == std::string::npos) continue;
    auto b = line.find('\0', a + 1);
    std::string full = line.substr(0, a);
    std::string name = line.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1);
    if (b != std::string::npos && b + 1 < line.size()) continue; // symbolic ref such as origin/HEAD
    if (full.empty()) continue;
    std::string revs = git_checked({"rev-list", full, "--"});
    std::istringstream rl(revs);
    for (std::string h; rl >> h;) {
      auto it = index.find(h);
      if (it != index.end()) commits[it->second].branches.insert(name);
    }
  }

  if (!include_merges) {
    std::erase_if(commits, [](const CommitMeta &c) { return c.is_merge; });
  }
  return commits;
}

CommitMeta RepositoryHandle::commit(const std::string &rev) const {
  std::string out = git_checked({"log", "-1", kLogFormat, rev, "--"});
  auto end = out.find('\x1e');
  auto c = parse_log_record(std::string_view(out).substr(0, end));
  c.topo_index = -1;
  return c;
}

std::optional<std::string> RepositoryHandle::read_object(const std::string &spec) const {
  std::lock_guard lock(batch_mutex_);
  if (!batch_) {
    batch_ = std::make_unique<PipedProcess>(
        std::vector<std::string>{"git", "-C", path_.string(), "cat-file", "--batch"}, fs::path{});
  }
  batch_->write_line(spec);
  std::string header = batch_->read_line();
  if (header.ends_with(" missing") || header.ends_with(" ambiguous")) return std::nullopt;
  std::istringstream in(header);
  std::string sha, type;
  std::size_t size = 0;
  in >> sha >> type >> size;
  std::string data = batch_->read_exact(size);
  batch_->read_line(); // trailing newline
  if (type != "blob") return std::nullopt;
  return data;
}

std::optional<std::string> RepositoryHandle::raw_blob(const std::string &commit,
                                                      const std::string &path) const {
  if (path.find('\n') != std::string::npos) return std::nullopt;
  return read_object(commit + ":" + path);
}

std::vector<std::string> RepositoryHandle::file_content(const std::string &commit,
                                                        const std::string &path) const {
  auto blob = raw_blob(commit, path);
  if (!blob) throw Error(ErrorKind::PathNotFound, "no path '" + path + "' at " + commit);
  if (is_binary_blob(*blob)) throw Error(ErrorKind::BinaryContent, path + " is binary");
  return split_text_lines(sanitize_utf8(*blob));
}

std::vector<FileModification> RepositoryHandle::diff_against(const std::string &parent,
                                                             const std::string &commit,
                                                             bool text_binary) const {
  std::string base = parent;
  if (base.empty()) base = std::string(trim(git_checked({"hash-object", "-t", "tree", "/dev/null"})));

  auto raw = parse_raw_z(git_checked({"diff-tree", "-r", "-M", "-z", "--raw", "--no-commit-id",
                                      base, commit}));
  std::vector<std::string> patch_args = {"diff-tree", "-r", "-M", "-p", "-U0", "--no-color",
                                         "--no-ext-diff", "--no-textconv", "--no-commit-id",
                                         "--diff-algorithm=myers", "--src-prefix=a/",
                                         "--dst-prefix=b/"};
  if (text_binary) patch_args.push_back("--text");
  auto per_file_patch = [&](const RawEntry &e) {
    auto args = patch_args;
    args.push_back(base);
    args.push_back(commit);
    args.push_back("--");
    args.push_back(e.src_path);
    if (e.dst_path != e.src_path) args.push_back(e.dst_path);
    auto sections = split_patch_sections(git_checked(args));
    return sections;
  };
  auto all_args = patch_args;
  all_args.push_back(base);
  all_args.push_back(commit);
  auto sections = split_patch_sections(git_checked(all_args));

  std::vector<FileModification> mods;
  std::size_t si = 0;
  const std::string null_sha(40, '0');
  for (const auto &e : raw) {
    std::size_t expected_sections = e.status == 'T' ? 2 : 1;
    std::string section;
    std::string header = "diff --git a/" + e.src_path + " b/" + e.dst_path;
    bool aligned = si + expected_sections <= sections.size() &&
                   sections[si].compare(0, header.size() + 1, header + "\n") == 0;
    if (aligned) {
      for (std::size_t k = 0; k < expected_sections; ++k) section += sections[si + k];
      si += expected_sections;
    } else {
      // positional alignment lost (quoted names); ask for this file alone
      auto own = per_file_patch(e);
      for (const auto &s : own) section += s;
      auto hit = std::find(sections.begin() + static_cast<std::ptrdiff_t>(si), sections.end(),
                           own.empty() ? std::string{} : own.front());
      if (hit != sections.end())
        si = static_cast<std::size_t>(hit - sections.begin()) + expected_sections;
    }

    // gitlinks (submodules) are not traversed
    if (e.old_mode == "160000" || e.new_mode == "160000") continue;

    FileModification m;
    m.parent_hash = parent;
    switch (e.status) {
    case 'A':
      m.change_type = ChangeType::Added;
      m.new_path = e.dst_path;
      break;
    case 'D':
      m.change_type = ChangeType::Deleted;
      m.old_path = e.src_path;
      break;
    case 'R':
      m.change_type = ChangeType::Renamed;
      m.old_path = e.src_path;
      m.new_path = e.dst_path;
      break;
    default:
      m.change_type = ChangeType::Modified;
      m.old_path = e.src_path;
      m.new_path = e.dst_path;
    }

    std::optional<std::string> pre, post;
    if (e.old_sha.find_first_not_of('0') != std::string::npos) pre = read_object(e.old_sha);
    if (e.new_sha.find_first_not_of('0') != std::string::npos) post = read_object(e.new_sha);
    bool binary = e.status == 'T' || (pre && is_binary_blob(*pre)) || (post && is_binary_blob(*post));
    m.binary = binary;
    m.pre_line_count = pre ? count_lines(*pre) : 0;
    m.post_line_count = post ? count_lines(*post) : 0;
    if (!binary || text_binary) {
      if (e.status != 'T') m.diff = std::move(section);
    }
    mods.push_back(std::move(m));
  }
  return mods;
}

std::vector<FileModification> RepositoryHandle::get_modifications(const CommitMeta &commit,
                                                                  bool text_binary) const {
  if (commit.parent_hashes.empty()) return diff_against("", commit.hash, text_binary);
  std::vector<FileModification> all;
  for (const auto &p : commit.parent_hashes) {
    auto mods = diff_against(p, commit.hash, text_binary);
    all.insert(all.end(), std::make_move_iterator(mods.begin()),
               std::make_move_iterator(mods.end()));
  }
  return all;
}

std::vector<LineAttribution> RepositoryHandle::blame(const std::string &commit,
                                                     const std::string &path, bool detect_moves,
                                                     bool detect_copies) const {
  auto blob = raw_blob(commit, path);
  if (!blob) throw Error(ErrorKind::PathNotFound, "no path '" + path + "' at " + commit);
  if (is_binary_blob(*blob)) throw Error(ErrorKind::BinaryContent, path + " is binary");

  std::vector<std::string> args = {"blame", "--line-porcelain"};
  if (detect_moves) args.push_back("-M");
  if (detect_copies) {
    args.push_back("-C");
    args.push_back("-C");
    args.push_back("-C");
  }
  args.push_back(commit);
  args.push_back("--");
  args.push_back(path);
  std::string out = git_checked(args);

  std::vector<LineAttribution> result;
  LineAttribution cur;
  bool in_entry = false;
  std::size_t pos = 0;
  while (pos < out.size()) {
    auto nl = out.find('\n', pos);
    if (nl == std::string::npos) nl = out.size();
    std::string_view line(out.data() + pos, nl - pos);
    pos = nl + 1;
    if (!in_entry) {
      // <sha> <orig-line> <final-line> [<count>]
      std::istringstream hdr{std::string(line)};
      hdr >> cur.origin_commit >> cur.origin_line >> cur.line_number;
      in_entry = true;
      continue;
    }
    if (!line.empty() && line.front() == '\t') {
      cur.content = sanitize_utf8(line.substr(1));
      result.push_back(cur);
      cur = LineAttribution{};
      in_entry = false;
      continue;
    }
    auto sp = line.find(' ');
    std::string_view key = line.substr(0, sp);
    std::string_view value = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
    if (key == "author") {
      cur.origin_author_name = std::string(value);
    } else if (key == "author-mail") {
      if (value.size() >= 2 && value.front() == '<' && value.back() == '>')
        value = value.substr(1, value.size() - 2);
      cur.origin_author_email = std::string(value);
    } else if (key == "author-time") {
      cur.origin_author_time = std::stoll(std::string(value));
    } else if (key == "filename") {
      cur.origin_path = unquote_path(value);
    }
  }
  std::sort(result.begin(), result.end(),
            [](const auto &a, const auto &b) { return a.line_number < b.line_number; });
  return result;
}

AliasMap AliasMap::parse(std::string_view text) {
  AliasMap m;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    auto arrow = line.find("->");
    if (arrow == std::string_view::npos)
      throw Error(ErrorKind::InvalidArgument,
                  "alias map line " + std::to_string(lineno) + ": expected 'from -> to'");
    auto from = to_lower(trim(line.substr(0, arrow)));
    auto to = to_lower(trim(line.substr(arrow + 2)));
    if (from.empty() || to.empty())
      throw Error(ErrorKind::InvalidArgument,
                  "alias map line " + std::to_string(lineno) + ": empty email");
    m.map_[from] = to;
    if (nl == text.size()) break;
  }
  return m;
}

AliasMap AliasMap::load(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::PathNotFound, "cannot read alias map " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string AliasMap::identity(const std::string &email) const {
  std::string key = to_lower(trim(email));
  // follow chains a->b->c, bounded against cycles
  for (int hops = 0; hops < 16; ++hops) {
    auto it = map_.find(key);
    if (it == map_.end() || it->second == key) break;
    key = it->second;
  }
  return key;
}

std::string AliasMap::digest() const {
  std::string canon;
  for (const auto &[from, to] : map_) canon += from + "->" + to + "\n";
  return fnv1a_hex(canon);
}

} // namespace coedit
