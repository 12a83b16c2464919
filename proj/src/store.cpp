#include "coedit/store.hpp"

#include "coedit/error.hpp"
#include "coedit/util.hpp"

#include <algorithm>
#include <sqlite3.h>
#include <sstream>

namespace coedit {

const char *to_string(CommitStatus s) {
  return s == CommitStatus::Processed ? "processed" : "skipped";
}

namespace {

[[noreturn]] void fail(sqlite3 *db, const std::string &what) {
  throw Error(ErrorKind::StoreIo, what + ": " + (db ? sqlite3_errmsg(db) : "out of memory"));
}

class Stmt {
public:
  Stmt(sqlite3 *db, const std::string &sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK)
      fail(db, "prepare");
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt &) = delete;
  Stmt &operator=(const Stmt &) = delete;

  void bind(int i, std::nullopt_t) { check(sqlite3_bind_null(stmt_, i)); }
  void bind(int i, std::int64_t v) { check(sqlite3_bind_int64(stmt_, i, v)); }
  void bind(int i, int v) { check(sqlite3_bind_int64(stmt_, i, v)); }
  void bind(int i, bool v) { check(sqlite3_bind_int64(stmt_, i, v ? 1 : 0)); }
  void bind(int i, double v) { check(sqlite3_bind_double(stmt_, i, v)); }
  void bind(int i, const std::string &v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
  }
  void bind(int i, const char *v) { bind(i, std::string(v)); }
  template <class T> void bind(int i, const std::optional<T> &v) {
    if (v) bind(i, *v);
    else bind(i, std::nullopt);
  }

  // true while rows are available
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }
  void run() {
    while (step()) {
    }
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  bool is_null(int i) const { return sqlite3_column_type(stmt_, i) == SQLITE_NULL; }
  std::string text(int i) const {
    auto p = reinterpret_cast<const char *>(sqlite3_column_text(stmt_, i));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, i))) : std::string{};
  }
  std::int64_t int64(int i) const { return sqlite3_column_int64(stmt_, i); }
  int int32(int i) const { return static_cast<int>(sqlite3_column_int64(stmt_, i)); }
  double real(int i) const { return sqlite3_column_double(stmt_, i); }
  std::optional<std::string> opt_text(int i) const {
    return is_null(i) ? std::nullopt : std::optional(text(i));
  }
  std::optional<int> opt_int(int i) const {
    return is_null(i) ? std::nullopt : std::optional(int32(i));
  }
  std::optional<std::int64_t> opt_int64(int i) const {
    return is_null(i) ? std::nullopt : std::optional(int64(i));
  }
  std::optional<double> opt_real(int i) const {
    return is_null(i) ? std::nullopt : std::optional(real(i));
  }

  // Renders column i for the canonical dump.
  std::string cell(int i) const {
    switch (sqlite3_column_type(stmt_, i)) {
    case SQLITE_NULL: return "";
    case SQLITE_INTEGER: return std::to_string(int64(i));
    case SQLITE_FLOAT: return format_double(real(i));
    default: return csv_field(text(i));
    }
  }
  int columns() const { return sqlite3_column_count(stmt_); }
  const char *column_name(int i) const { return sqlite3_column_name(stmt_, i); }

private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, "bind");
  }
  sqlite3 *db_;
  sqlite3_stmt *stmt_ = nullptr;
};

constexpr const char *kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta(
  key TEXT PRIMARY KEY,
  value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS commits(
  hash TEXT PRIMARY KEY,
  author_name TEXT NOT NULL,
  author_email TEXT NOT NULL,
  author_id TEXT NOT NULL,
  committer_name TEXT NOT NULL,
  committer_email TEXT NOT NULL,
  author_time INTEGER NOT NULL,
  committer_time INTEGER NOT NULL,
  parents TEXT NOT NULL,
  is_merge INTEGER NOT NULL,
  branches TEXT NOT NULL,
  topo_index INTEGER NOT NULL,
  status TEXT NOT NULL,
  skip_reason TEXT NOT NULL,
  detail TEXT NOT NULL,
  num_modifications INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS modifications(
  commit_hash TEXT NOT NULL REFERENCES commits(hash) DEFERRABLE INITIALLY DEFERRED,
  parent TEXT NOT NULL,
  old_path TEXT,
  new_path TEXT,
  change_type TEXT NOT NULL,
  author_id TEXT NOT NULL,
  timestamp INTEGER NOT NULL,
  pre_line_count INTEGER NOT NULL,
  post_line_count INTEGER NOT NULL,
  num_edits INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS modifications_time ON modifications(timestamp);
CREATE TABLE IF NOT EXISTS edits(
  id INTEGER PRIMARY KEY,
  modifying_commit TEXT NOT NULL REFERENCES commits(hash) DEFERRABLE INITIALLY DEFERRED,
  original_commit TEXT NOT NULL,
  path_pre TEXT,
  path_post TEXT,
  pre_line_start INTEGER,
  post_line_start INTEGER,
  num_pre_lines INTEGER NOT NULL,
  num_post_lines INTEGER NOT NULL,
  edit_type TEXT NOT NULL,
  granularity TEXT NOT NULL,
  levenshtein INTEGER,
  entropy_pre REAL,
  entropy_post REAL,
  original_author TEXT NOT NULL,
  modifying_author TEXT NOT NULL,
  timestamp INTEGER NOT NULL,
  original_timestamp INTEGER NOT NULL,
  merge_parent TEXT,
  file_total_lines INTEGER,
  file_cyclomatic INTEGER,
  original_path TEXT,
  original_line INTEGER,
  pre_text TEXT NOT NULL,
  post_text TEXT NOT NULL,
  pre_blank INTEGER NOT NULL,
  post_blank INTEGER NOT NULL,
  merge_discard INTEGER NOT NULL
);
CREATE UNIQUE INDEX IF NOT EXISTS edits_key ON edits(
  modifying_commit, IFNULL(path_post, path_pre), IFNULL(pre_line_start, -1),
  IFNULL(post_line_start, -1), IFNULL(merge_parent, ''));
CREATE INDEX IF NOT EXISTS edits_time ON edits(timestamp, modifying_commit);
)sql";

constexpr const char *kEditColumns =
    "modifying_commit, original_commit, path_pre, path_post, pre_line_start, post_line_start, "
    "num_pre_lines, num_post_lines, edit_type, granularity, levenshtein, entropy_pre, "
    "entropy_post, original_author, modifying_author, timestamp, original_timestamp, "
    "merge_parent, file_total_lines, file_cyclomatic, original_path, original_line, pre_text, "
    "post_text, pre_blank, post_blank, merge_discard";

constexpr const char *kEditOrder =
    "timestamp, modifying_commit, IFNULL(path_post, path_pre), IFNULL(pre_line_start, -1), "
    "IFNULL(post_line_start, -1), IFNULL(merge_parent, ''), granularity";

constexpr const char *kCommitColumns =
    "hash, author_name, author_email, author_id, committer_name, committer_email, author_time, "
    "committer_time, parents, is_merge, branches, topo_index, status, skip_reason, detail, "
    "num_modifications";

constexpr const char *kModificationColumns =
    "commit_hash, parent, old_path, new_path, change_type, author_id, timestamp, "
    "pre_line_count, post_line_count, num_edits";

EditRecord read_edit(const Stmt &s) {
  EditRecord r;
  r.modifying_commit = s.text(0);
  r.original_commit = s.text(1);
  r.path_pre = s.opt_text(2);
  r.path_post = s.opt_text(3);
  r.pre_line_start = s.opt_int(4);
  r.post_line_start = s.opt_int(5);
  r.num_pre_lines = s.int32(6);
  r.num_post_lines = s.int32(7);
  r.edit_type = edit_type_from_string(s.text(8));
  r.granularity = granularity_from_string(s.text(9));
  r.levenshtein = s.opt_int64(10);
  r.entropy_pre = s.opt_real(11);
  r.entropy_post = s.opt_real(12);
  r.original_author = s.text(13);
  r.modifying_author = s.text(14);
  r.timestamp = s.int64(15);
  r.original_timestamp = s.int64(16);
  r.merge_parent = s.opt_text(17);
  r.file_total_lines = s.opt_int(18);
  r.file_cyclomatic = s.opt_int(19);
  r.original_path = s.opt_text(20);
  r.original_line = s.opt_int(21);
  r.pre_text = s.text(22);
  r.post_text = s.text(23);
  r.pre_blank = s.int64(24) != 0;
  r.post_blank = s.int64(25) != 0;
  r.merge_discard = s.int64(26) != 0;
  return r;
}

std::string join(const std::vector<std::string> &v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += v[i];
  }
  return out;
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

} // namespace

Store::Store(sqlite3 *db) : db_(db) {}

Store::~Store() { sqlite3_close_v2(db_); }

void Store::exec(const char *sql) const {
  char *msg = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &msg) != SQLITE_OK) {
    std::string text = msg ? msg : "unknown error";
    sqlite3_free(msg);
    throw Error(ErrorKind::StoreIo, text);
  }
}

namespace {

sqlite3 *open_db(const std::filesystem::path &path, int flags) {
  sqlite3 *db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, flags | SQLITE_OPEN_FULLMUTEX, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close_v2(db);
    throw Error(ErrorKind::StoreIo, "cannot open store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db, 10000);
  return db;
}

} // namespace

std::unique_ptr<Store> Store::init(const std::filesystem::path &path,
                                   const std::string &config_fingerprint,
                                   const std::string &config_description) {
  std::unique_ptr<Store> store(
      new Store(open_db(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE)));
  store->exec("PRAGMA journal_mode=WAL");
  store->exec("PRAGMA synchronous=NORMAL");
  store->exec("PRAGMA foreign_keys=ON");
  store->exec("BEGIN IMMEDIATE");
  try {
    store->exec(kSchema);
    std::string version = store->meta_value("schema_version");
    if (version.empty()) {
      Stmt ins(store->db_, "INSERT INTO meta(key, value) VALUES (?, ?)");
      ins.bind(1, "schema_version");
      ins.bind(2, std::to_string(kSchemaVersion));
      ins.run();
      ins.bind(1, "config_fingerprint");
      ins.bind(2, config_fingerprint);
      ins.run();
      ins.bind(1, "config");
      ins.bind(2, config_description);
      ins.run();
    } else {
      if (version != std::to_string(kSchemaVersion))
        throw Error(ErrorKind::StoreIo, "unsupported store schema version " + version);
      std::string stored = store->meta_value("config_fingerprint");
      if (stored != config_fingerprint)
        throw Error(ErrorKind::FingerprintMismatch,
                    "store " + path.string() + " was mined with a different configuration (" +
                        store->meta_value("config") + ")");
    }
    store->exec("COMMIT");
  } catch (...) {
    sqlite3_exec(store->db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
  return store;
}

std::unique_ptr<Store> Store::open_existing(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorKind::StoreIo, "store " + path.string() + " does not exist");
  std::unique_ptr<Store> store(new Store(open_db(path, SQLITE_OPEN_READWRITE)));
  store->exec("PRAGMA foreign_keys=ON");
  Stmt probe(store->db_, "SELECT count(*) FROM sqlite_master WHERE name = 'meta'");
  if (!probe.step() || probe.int64(0) == 0)
    throw Error(ErrorKind::StoreIo, path.string() + " is not a co-edit store");
  return store;
}

std::string Store::meta_value(const std::string &key) const {
  Stmt s(db_, "SELECT value FROM meta WHERE key = ?");
  s.bind(1, key);
  return s.step() ? s.text(0) : std::string{};
}

std::string Store::fingerprint() const {
  std::lock_guard lock(mutex_);
  return meta_value("config_fingerprint");
}

std::string Store::config_description() const {
  std::lock_guard lock(mutex_);
  return meta_value("config");
}

void Store::set_fault_hook(std::function<void()> hook) {
  std::lock_guard lock(mutex_);
  fault_hook_ = std::move(hook);
}

bool Store::write_commit_result(const CommitRecord &commit,
                                const std::vector<ModificationRecord> &modifications,
                                const std::vector<EditRecord> &edits) {
  std::lock_guard lock(mutex_);
  exec("BEGIN IMMEDIATE");
  try {
    {
      Stmt probe(db_, "SELECT 1 FROM commits WHERE hash = ?");
      probe.bind(1, commit.meta.hash);
      if (probe.step()) {
        exec("ROLLBACK");
        return false;
      }
    }

    Stmt ins(db_, std::string("INSERT INTO edits(") + kEditColumns +
                      ") VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
    for (const auto &e : edits) {
      int i = 0;
      ins.bind(++i, e.modifying_commit);
      ins.bind(++i, e.original_commit);
      ins.bind(++i, e.path_pre);
      ins.bind(++i, e.path_post);
      ins.bind(++i, e.pre_line_start);
      ins.bind(++i, e.post_line_start);
      ins.bind(++i, e.num_pre_lines);
      ins.bind(++i, e.num_post_lines);
      ins.bind(++i, to_string(e.edit_type));
      ins.bind(++i, to_string(e.granularity));
      ins.bind(++i, e.levenshtein);
      ins.bind(++i, e.entropy_pre);
      ins.bind(++i, e.entropy_post);
      ins.bind(++i, e.original_author);
      ins.bind(++i, e.modifying_author);
      ins.bind(++i, e.timestamp);
      ins.bind(++i, e.original_timestamp);
      ins.bind(++i, e.merge_parent);
      ins.bind(++i, e.file_total_lines);
      ins.bind(++i, e.file_cyclomatic);
      ins.bind(++i, e.original_path);
      ins.bind(++i, e.original_line);
      ins.bind(++i, e.pre_text);
      ins.bind(++i, e.post_text);
      ins.bind(++i, e.pre_blank);
      ins.bind(++i, e.post_blank);
      ins.bind(++i, e.merge_discard);
      ins.run();
    }

    Stmt mod(db_, std::string("INSERT INTO modifications(") + kModificationColumns +
                      ") VALUES (?,?,?,?,?,?,?,?,?,?)");
    for (const auto &m : modifications) {
      int i = 0;
      mod.bind(++i, m.commit);
      mod.bind(++i, m.parent);
      mod.bind(++i, m.old_path);
      mod.bind(++i, m.new_path);
      mod.bind(++i, to_string(m.change_type));
      mod.bind(++i, m.author_id);
      mod.bind(++i, m.timestamp);
      mod.bind(++i, m.pre_line_count);
      mod.bind(++i, m.post_line_count);
      mod.bind(++i, m.num_edits);
      mod.run();
    }

    if (fault_hook_) fault_hook_();

    Stmt c(db_, std::string("INSERT INTO commits(") + kCommitColumns +
                    ") VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
    const auto &m = commit.meta;
    int i = 0;
    c.bind(++i, m.hash);
    c.bind(++i, m.author_name);
    c.bind(++i, m.author_email);
    c.bind(++i, commit.author_id);
    c.bind(++i, m.committer_name);
    c.bind(++i, m.committer_email);
    c.bind(++i, m.author_time);
    c.bind(++i, m.committer_time);
    c.bind(++i, join(m.parent_hashes, ' '));
    c.bind(++i, m.is_merge);
    c.bind(++i, join(std::vector<std::string>(m.branches.begin(), m.branches.end()), '\n'));
    c.bind(++i, m.topo_index);
    c.bind(++i, to_string(commit.status));
    c.bind(++i, commit.skip_reason);
    c.bind(++i, commit.detail);
    c.bind(++i, commit.num_modifications);
    c.run();

    exec("COMMIT");
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
  return true;
}

bool Store::is_processed(const std::string &hash) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT 1 FROM commits WHERE hash = ?");
  s.bind(1, hash);
  return s.step();
}

std::set<std::string> Store::processed_commits() const {
  std::lock_guard lock(mutex_);
  std::set<std::string> out;
  Stmt s(db_, "SELECT hash FROM commits");
  while (s.step()) out.insert(s.text(0));
  return out;
}

std::set<std::string> Store::unprocessed_commits(const std::vector<std::string> &all) const {
  auto done = processed_commits();
  std::set<std::string> out;
  for (const auto &h : all)
    if (!done.count(h)) out.insert(h);
  return out;
}

std::vector<EditRecord> Store::query_edits(const EditFilter &filter) const {
  std::lock_guard lock(mutex_);
  std::string sql = std::string("SELECT ") + kEditColumns + " FROM edits WHERE 1";
  auto placeholders = [](std::size_t n) {
    std::string p;
    for (std::size_t i = 0; i < n; ++i) p += i ? ",?" : "?";
    return p;
  };
  if (filter.time.start) sql += " AND timestamp >= ?";
  if (filter.time.end) sql += " AND timestamp < ?";
  if (!filter.authors.empty()) {
    auto p = placeholders(filter.authors.size());
    sql += " AND (modifying_author IN (" + p + ") OR original_author IN (" + p + "))";
  }
  if (!filter.paths.empty()) {
    auto p = placeholders(filter.paths.size());
    sql += " AND (path_pre IN (" + p + ") OR path_post IN (" + p + "))";
  }
  if (!filter.edit_types.empty())
    sql += " AND edit_type IN (" + placeholders(filter.edit_types.size()) + ")";
  if (filter.granularity) sql += " AND granularity = ?";
  sql += std::string(" ORDER BY ") + kEditOrder;

  Stmt s(db_, sql);
  int i = 0;
  if (filter.time.start) s.bind(++i, *filter.time.start);
  if (filter.time.end) s.bind(++i, *filter.time.end);
  for (int rep = 0; rep < 2 && !filter.authors.empty(); ++rep)
    for (const auto &a : filter.authors) s.bind(++i, a);
  for (int rep = 0; rep < 2 && !filter.paths.empty(); ++rep)
    for (const auto &p : filter.paths) s.bind(++i, p);
  for (auto t : filter.edit_types) s.bind(++i, to_string(t));
  if (filter.granularity) s.bind(++i, to_string(*filter.granularity));

  std::vector<EditRecord> out;
  while (s.step()) out.push_back(read_edit(s));
  return out;
}

std::vector<CommitRecord> Store::commits() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, std::string("SELECT ") + kCommitColumns + " FROM commits ORDER BY topo_index, hash");
  std::vector<CommitRecord> out;
  while (s.step()) {
    CommitRecord c;
    c.meta.hash = s.text(0);
    c.meta.author_name = s.text(1);
    c.meta.author_email = s.text(2);
    c.author_id = s.text(3);
    c.meta.committer_name = s.text(4);
    c.meta.committer_email = s.text(5);
    c.meta.author_time = s.int64(6);
    c.meta.committer_time = s.int64(7);
    c.meta.parent_hashes = split(s.text(8), ' ');
    c.meta.is_merge = s.int64(9) != 0;
    for (auto &b : split(s.text(10), '\n')) c.meta.branches.insert(std::move(b));
    c.meta.topo_index = s.int64(11);
    c.status = s.text(12) == "skipped" ? CommitStatus::Skipped : CommitStatus::Processed;
    c.skip_reason = s.text(13);
    c.detail = s.text(14);
    c.num_modifications = s.int32(15);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ModificationRecord> Store::modifications(const TimeRange &range) const {
  std::lock_guard lock(mutex_);
  std::string sql = std::string("SELECT ") + kModificationColumns + " FROM modifications WHERE 1";
  if (range.start) sql += " AND timestamp >= ?";
  if (range.end) sql += " AND timestamp < ?";
  sql += " ORDER BY timestamp, commit_hash, parent, IFNULL(new_path, old_path)";
  Stmt s(db_, sql);
  int i = 0;
  if (range.start) s.bind(++i, *range.start);
  if (range.end) s.bind(++i, *range.end);
  std::vector<ModificationRecord> out;
  while (s.step()) {
    ModificationRecord m;
    m.commit = s.text(0);
    m.parent = s.text(1);
    m.old_path = s.opt_text(2);
    m.new_path = s.opt_text(3);
    m.change_type = change_type_from_string(s.text(4));
    m.author_id = s.text(5);
    m.timestamp = s.int64(6);
    m.pre_line_count = s.int32(7);
    m.post_line_count = s.int32(8);
    m.num_edits = s.int32(9);
    out.push_back(std::move(m));
  }
  return out;
}

std::size_t Store::edit_count() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT count(*) FROM edits");
  s.step();
  return static_cast<std::size_t>(s.int64(0));
}

std::string Store::dump() const {
  std::lock_guard lock(mutex_);
  std::ostringstream out;
  auto section = [&](const std::string &name, const std::string &sql) {
    Stmt s(db_, sql);
    std::vector<std::string> rows;
    std::string header;
    for (int i = 0; i < s.columns(); ++i) header += (i ? "," : "") + std::string(s.column_name(i));
    while (s.step()) {
      std::string row;
      for (int i = 0; i < s.columns(); ++i) {
        if (i) row.push_back(',');
        row += s.cell(i);
      }
      rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    out << "# " << name << "\n" << header << "\n";
    for (const auto &r : rows) out << r << "\n";
  };
  section("meta", "SELECT key, value FROM meta");
  section("commits", std::string("SELECT ") + kCommitColumns + " FROM commits");
  section("modifications", std::string("SELECT ") + kModificationColumns + " FROM modifications");
  section("edits", std::string("SELECT ") + kEditColumns + " FROM edits");
  return out.str();
}

} // namespace coedit
