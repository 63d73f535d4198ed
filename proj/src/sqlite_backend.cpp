#include "store_backend.hpp"

#include <rtriage/error.hpp>

#include <fmt/format.h>
#include <sqlite3.h>

#include <map>
#include <mutex>
#include <system_error>

namespace rtriage::hashdb {
namespace {

constexpr std::string_view kFormatTag = "rtriage-hashdb";
constexpr int kSchemaVersion = 1;

constexpr const char* kSchema = R"sql(
CREATE TABLE meta (
  key   TEXT PRIMARY KEY,
  value TEXT NOT NULL
);
CREATE TABLE os (
  os_id   INTEGER PRIMARY KEY,
  name    TEXT NOT NULL,
  version TEXT NOT NULL,
  UNIQUE (name, version)
);
CREATE TABLE package (
  package_id INTEGER PRIMARY KEY,
  name       TEXT NOT NULL,
  version    TEXT NOT NULL,
  language   TEXT NOT NULL,
  os_id      INTEGER NOT NULL REFERENCES os(os_id),
  kind       TEXT NOT NULL CHECK (kind IN ('os-baseline', 'application')),
  UNIQUE (name, version, language, os_id)
);
CREATE TABLE fingerprint (
  fp_id INTEGER PRIMARY KEY,
  md5   TEXT NOT NULL CHECK (length(md5) = 32),
  size  INTEGER NOT NULL,
  sha1  TEXT,
  UNIQUE (md5, size)
);
CREATE TABLE link (
  package_id    INTEGER NOT NULL REFERENCES package(package_id),
  fp_id         INTEGER NOT NULL REFERENCES fingerprint(fp_id),
  relative_path TEXT NOT NULL,
  filename      TEXT NOT NULL,
  PRIMARY KEY (package_id, fp_id, relative_path)
) WITHOUT ROWID;
CREATE INDEX link_by_fp ON link(fp_id);
)sql";

[[noreturn]] void fail(sqlite3* db, int rc, std::string_view what) {
  const char* detail = db ? sqlite3_errmsg(db) : sqlite3_errstr(rc);
  const auto code = (rc & 0xff) == SQLITE_NOTADB || (rc & 0xff) == SQLITE_CORRUPT ? ErrorCode::InvalidStore
                                                                                  : ErrorCode::IoError;
  raise(code, fmt::format("{}: {}", what, detail));
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    const int rc = sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr);
    if (rc != SQLITE_OK) fail(db, rc, "prepare");
  }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement() { sqlite3_finalize(stmt_); }

  Statement& bind(int i, std::string_view text) {
    check(sqlite3_bind_text(stmt_, i, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }

  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, rc, "step");
  }

  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, col)) : std::string();
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, rc, "bind");
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

// Resets on scope exit so a cached statement is reusable after a throw.
class Use {
 public:
  explicit Use(Statement& s) : s_(s) {}
  ~Use() { s_.reset(); }
  Statement* operator->() { return &s_; }

 private:
  Statement& s_;
};

PackageKind kind_from_db(const std::string& text) {
  auto k = parse_package_kind(text);
  if (!k) raise(ErrorCode::InvalidStore, fmt::format("bad package kind '{}'", text));
  return *k;
}

class SqliteStore final : public StoreBackend {
 public:
  SqliteStore(const std::filesystem::path& path, int flags) {
    const int rc = sqlite3_open_v2(path.c_str(), &db_, flags, nullptr);
    if (rc != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : sqlite3_errstr(rc);
      sqlite3_close(db_);
      db_ = nullptr;
      raise(ErrorCode::IoError, fmt::format("{}: {}", path.string(), msg));
    }
    sqlite3_busy_timeout(db_, 5000);
  }

  ~SqliteStore() override {
    cache_.clear();
    sqlite3_close(db_);
  }

  void exec(const char* sql) {
    char* err = nullptr;
    const int rc = sqlite3_exec(db_, sql, nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
      std::string msg = err ? err : sqlite3_errstr(rc);
      sqlite3_free(err);
      const auto code = (rc & 0xff) == SQLITE_NOTADB || (rc & 0xff) == SQLITE_CORRUPT ? ErrorCode::InvalidStore
                                                                                      : ErrorCode::IoError;
      raise(code, msg);
    }
  }

  void create(const StoreDescriptor& d) {
    exec("PRAGMA foreign_keys = ON");
    exec("BEGIN");
    exec(kSchema);
    put_meta("format", kFormatTag);
    put_meta("schema_version", std::to_string(kSchemaVersion));
    put_meta("name", d.name);
    put_meta("version_label", d.version_label);
    exec("COMMIT");
    descriptor_ = d;
  }

  void load() {
    exec("PRAGMA foreign_keys = ON");
    std::map<std::string, std::string> meta;
    try {
      Statement s(db_, "SELECT key, value FROM meta");
      while (s.step()) meta[s.text(0)] = s.text(1);
    } catch (const Error& e) {
      raise(ErrorCode::InvalidStore, e.what());
    }
    if (meta["format"] != kFormatTag) raise(ErrorCode::InvalidStore, "not a fingerprint store");
    if (meta["schema_version"] != std::to_string(kSchemaVersion))
      raise(ErrorCode::InvalidStore, fmt::format("unsupported schema version '{}'", meta["schema_version"]));
    descriptor_ = {meta["name"], meta["version_label"]};
    if (descriptor_.name.empty()) raise(ErrorCode::InvalidStore, "store has no name");
  }

  StoreDescriptor descriptor() const override { return descriptor_; }

  // Nested calls become savepoints so a bulk load can wrap many writes.
  void begin() override {
    std::lock_guard lock(mu_);
    exec(depth_ == 0 ? "BEGIN IMMEDIATE" : "SAVEPOINT nested");
    ++depth_;
  }
  void commit() override {
    std::lock_guard lock(mu_);
    exec(depth_ == 1 ? "COMMIT" : "RELEASE nested");
    --depth_;
  }
  void rollback() noexcept override {
    std::lock_guard lock(mu_);
    if (depth_ == 0) return;
    if (depth_ == 1) {
      sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    } else {
      sqlite3_exec(db_, "ROLLBACK TO nested", nullptr, nullptr, nullptr);
      sqlite3_exec(db_, "RELEASE nested", nullptr, nullptr, nullptr);
    }
    --depth_;
  }

  std::optional<OsId> find_os(std::string_view name, std::string_view version) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT os_id FROM os WHERE name = ?1 AND version = ?2"));
    s->bind(1, name).bind(2, version);
    if (!s->step()) return std::nullopt;
    return OsId{s->i64(0)};
  }

  OsId insert_os(std::string_view name, std::string_view version) override {
    std::lock_guard lock(mu_);
    Use s(stmt("INSERT INTO os(name, version) VALUES (?1, ?2)"));
    s->bind(1, name).bind(2, version);
    s->step();
    return OsId{sqlite3_last_insert_rowid(db_)};
  }

  std::optional<OperatingSystemRec> get_os(OsId id) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT os_id, name, version FROM os WHERE os_id = ?1"));
    s->bind(1, value_of(id));
    if (!s->step()) return std::nullopt;
    return OperatingSystemRec{OsId{s->i64(0)}, s->text(1), s->text(2)};
  }

  std::vector<OperatingSystemRec> list_os() const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT os_id, name, version FROM os ORDER BY os_id"));
    std::vector<OperatingSystemRec> out;
    while (s->step()) out.push_back({OsId{s->i64(0)}, s->text(1), s->text(2)});
    return out;
  }

  std::optional<PackageId> find_package(std::string_view name, std::string_view version, std::string_view language,
                                        OsId os) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT package_id FROM package WHERE name = ?1 AND version = ?2 AND language = ?3 AND os_id = ?4"));
    s->bind(1, name).bind(2, version).bind(3, language).bind(4, value_of(os));
    if (!s->step()) return std::nullopt;
    return PackageId{s->i64(0)};
  }

  PackageId insert_package(std::string_view name, std::string_view version, std::string_view language, OsId os,
                           PackageKind kind) override {
    std::lock_guard lock(mu_);
    Use s(stmt("INSERT INTO package(name, version, language, os_id, kind) VALUES (?1, ?2, ?3, ?4, ?5)"));
    s->bind(1, name).bind(2, version).bind(3, language).bind(4, value_of(os)).bind(5, to_string(kind));
    s->step();
    return PackageId{sqlite3_last_insert_rowid(db_)};
  }

  std::optional<PackageRec> get_package(PackageId id) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT package_id, name, version, language, os_id, kind FROM package WHERE package_id = ?1"));
    s->bind(1, value_of(id));
    if (!s->step()) return std::nullopt;
    return package_row(s);
  }

  std::vector<PackageRec> list_packages() const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT package_id, name, version, language, os_id, kind FROM package ORDER BY package_id"));
    std::vector<PackageRec> out;
    while (s->step()) out.push_back(package_row(s));
    return out;
  }

  std::pair<FingerprintRowId, bool> upsert_fingerprint(const Fingerprint& fp) override {
    std::lock_guard lock(mu_);
    {
      Use s(stmt("SELECT fp_id FROM fingerprint WHERE md5 = ?1 AND size = ?2"));
      s->bind(1, fp.md5).bind(2, static_cast<std::int64_t>(fp.size));
      if (s->step()) return {s->i64(0), false};
    }
    Use s(stmt("INSERT INTO fingerprint(md5, size) VALUES (?1, ?2)"));
    s->bind(1, fp.md5).bind(2, static_cast<std::int64_t>(fp.size));
    s->step();
    return {sqlite3_last_insert_rowid(db_), true};
  }

  bool insert_link(PackageId package, FingerprintRowId fp, std::string_view filename,
                   std::string_view relative_path) override {
    std::lock_guard lock(mu_);
    Use s(stmt("INSERT OR IGNORE INTO link(package_id, fp_id, relative_path, filename) VALUES (?1, ?2, ?3, ?4)"));
    s->bind(1, value_of(package)).bind(2, fp).bind(3, relative_path).bind(4, filename);
    s->step();
    return sqlite3_changes(db_) > 0;
  }

  bool package_has_fingerprint(PackageId package, const Fingerprint& fp) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT 1 FROM link JOIN fingerprint USING (fp_id) "
               "WHERE link.package_id = ?1 AND fingerprint.md5 = ?2 AND fingerprint.size = ?3 LIMIT 1"));
    s->bind(1, value_of(package)).bind(2, fp.md5).bind(3, static_cast<std::int64_t>(fp.size));
    return s->step();
  }

  std::vector<RawHit> lookup(std::string_view md5, std::optional<std::uint64_t> size) const override {
    std::lock_guard lock(mu_);
    Use s(size ? stmt("SELECT DISTINCT p.package_id, p.name, o.name, o.version, l.filename "
                      "FROM fingerprint f JOIN link l ON l.fp_id = f.fp_id "
                      "JOIN package p ON p.package_id = l.package_id JOIN os o ON o.os_id = p.os_id "
                      "WHERE f.md5 = ?1 AND f.size = ?2 ORDER BY p.package_id, l.filename")
               : stmt("SELECT DISTINCT p.package_id, p.name, o.name, o.version, l.filename "
                      "FROM fingerprint f JOIN link l ON l.fp_id = f.fp_id "
                      "JOIN package p ON p.package_id = l.package_id JOIN os o ON o.os_id = p.os_id "
                      "WHERE f.md5 = ?1 ORDER BY p.package_id, l.filename"));
    s->bind(1, md5);
    if (size) s->bind(2, static_cast<std::int64_t>(*size));
    std::vector<RawHit> out;
    while (s->step()) out.push_back({PackageId{s->i64(0)}, s->text(1), s->text(2), s->text(3), s->text(4)});
    return out;
  }

  std::uint64_t fingerprint_count(PackageId package) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT COUNT(DISTINCT fp_id) FROM link WHERE package_id = ?1"));
    s->bind(1, value_of(package));
    s->step();
    return static_cast<std::uint64_t>(s->i64(0));
  }

  std::vector<Fingerprint> linkset(PackageId package) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT DISTINCT f.md5, f.size FROM link l JOIN fingerprint f ON f.fp_id = l.fp_id "
               "WHERE l.package_id = ?1 ORDER BY f.md5, f.size"));
    s->bind(1, value_of(package));
    std::vector<Fingerprint> out;
    while (s->step()) out.push_back({s->text(0), static_cast<std::uint64_t>(s->i64(1))});
    return out;
  }

  std::vector<PackageLink> links(PackageId package) const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT f.md5, f.size, l.filename, l.relative_path FROM link l JOIN fingerprint f ON f.fp_id = l.fp_id "
               "WHERE l.package_id = ?1 ORDER BY l.relative_path, f.md5, f.size"));
    s->bind(1, value_of(package));
    std::vector<PackageLink> out;
    while (s->step())
      out.push_back({package, {s->text(0), static_cast<std::uint64_t>(s->i64(1))}, s->text(2), s->text(3)});
    return out;
  }

  StoreCounts counts() const override {
    std::lock_guard lock(mu_);
    Use s(stmt("SELECT (SELECT COUNT(*) FROM os), (SELECT COUNT(*) FROM package), "
               "(SELECT COUNT(*) FROM fingerprint), (SELECT COUNT(*) FROM link)"));
    s->step();
    return {static_cast<std::uint64_t>(s->i64(0)), static_cast<std::uint64_t>(s->i64(1)),
            static_cast<std::uint64_t>(s->i64(2)), static_cast<std::uint64_t>(s->i64(3))};
  }

 private:
  Statement& stmt(const char* sql) const {
    auto it = cache_.find(sql);
    if (it == cache_.end()) it = cache_.emplace(sql, std::make_unique<Statement>(db_, sql)).first;
    return *it->second;
  }

  static PackageRec package_row(Use& s) {
    return {PackageId{s->i64(0)}, s->text(1), s->text(2), s->text(3), OsId{s->i64(4)}, kind_from_db(s->text(5))};
  }

  void put_meta(std::string_view key, std::string_view value) {
    Statement s(db_, "INSERT INTO meta(key, value) VALUES (?1, ?2)");
    s.bind(1, key).bind(2, value);
    s.step();
  }

  sqlite3* db_ = nullptr;
  StoreDescriptor descriptor_;
  mutable std::recursive_mutex mu_;
  int depth_{0};
  mutable std::map<const char*, std::unique_ptr<Statement>> cache_;
};

} // namespace

std::shared_ptr<StoreBackend> create_sqlite_store(const std::filesystem::path& path,
                                                  const StoreDescriptor& descriptor) {
  std::error_code ec;
  if (std::filesystem::exists(path, ec))
    raise(ErrorCode::AlreadyExists, fmt::format("'{}' already exists", path.string()));
  auto store = std::make_shared<SqliteStore>(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX);
  try {
    store->create(descriptor);
  } catch (...) {
    store.reset();
    std::filesystem::remove(path, ec);
    throw;
  }
  return store;
}

std::shared_ptr<StoreBackend> open_sqlite_store(const std::filesystem::path& path, OpenMode mode) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    raise(ErrorCode::IoError, fmt::format("no store at '{}'", path.string()));
  const int flags = (mode == OpenMode::ReadOnly ? SQLITE_OPEN_READONLY : SQLITE_OPEN_READWRITE) | SQLITE_OPEN_FULLMUTEX;
  auto store = std::make_shared<SqliteStore>(path, flags);
  store->load();
  return store;
}

} // namespace rtriage::hashdb
