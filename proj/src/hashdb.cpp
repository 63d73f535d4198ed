#include <rtriage/hashdb.hpp>

#include "store_backend.hpp"

#include <rtriage/digest.hpp>
#include <rtriage/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <set>

namespace rtriage::hashdb {

std::string_view to_string(PackageKind kind) noexcept {
  return kind == PackageKind::OsBaseline ? "os-baseline" : "application";
}

std::optional<PackageKind> parse_package_kind(std::string_view text) noexcept {
  if (text == "os-baseline") return PackageKind::OsBaseline;
  if (text == "application") return PackageKind::Application;
  return std::nullopt;
}

Store::Store(std::shared_ptr<StoreBackend> backend, StoreDescriptor descriptor)
    : backend_(std::move(backend)), descriptor_(std::move(descriptor)) {}

Store Store::init(const std::filesystem::path& path, const StoreDescriptor& descriptor) {
  if (descriptor.name.empty()) raise(ErrorCode::InvalidArgument, "store name must not be empty");
  auto backend = create_sqlite_store(path, descriptor);
  return Store(backend, backend->descriptor());
}

Store Store::open(const std::filesystem::path& path, OpenMode mode) {
  auto backend = open_sqlite_store(path, mode);
  return Store(backend, backend->descriptor());
}

void Store::begin() { backend_->begin(); }
void Store::commit() { backend_->commit(); }
void Store::rollback() noexcept { backend_->rollback(); }

OsId Store::add_os(std::string_view name, std::string_view version) {
  if (name.empty()) raise(ErrorCode::InvalidArgument, "OS name must not be empty");
  return transaction([&] {
    if (auto id = backend_->find_os(name, version)) return *id;
    return backend_->insert_os(name, version);
  });
}

PackageId Store::add_package(std::string_view name, std::string_view version, std::string_view language, OsId os,
                             PackageKind kind) {
  if (name.empty()) raise(ErrorCode::InvalidArgument, "package name must not be empty");
  return transaction([&] {
    if (!backend_->get_os(os)) raise(ErrorCode::UnknownOs, fmt::format("no OS with id {}", value_of(os)));
    if (auto id = backend_->find_package(name, version, language, os)) return *id;
    return backend_->insert_package(name, version, language, os, kind);
  });
}

bool Store::link_file(PackageId package, const Fingerprint& fingerprint, std::string_view filename,
                      std::string_view relative_path) {
  if (!is_md5_hex(fingerprint.md5)) raise(ErrorCode::InvalidArgument, fmt::format("bad md5 '{}'", fingerprint.md5));
  return transaction([&] {
    if (!backend_->get_package(package))
      raise(ErrorCode::UnknownPackage, fmt::format("no package with id {}", value_of(package)));
    const auto [fp, inserted] = backend_->upsert_fingerprint(fingerprint);
    return backend_->insert_link(package, fp, filename, relative_path);
  });
}

std::string hash_entry(const vfs::Source& source, const vfs::FileEntry& entry) {
  auto stream = source.open_entry(entry);
  Digest md5(DigestAlgorithm::Md5);
  std::array<std::uint8_t, 64 * 1024> buf;
  while (const auto n = stream->read(buf)) md5.update(std::span<const std::uint8_t>(buf.data(), n));
  return md5.hex_final();
}

IngestStats Store::ingest_source(PackageId package, const vfs::Source& source, vfs::WalkOptions opts) {
  return ingest(package, source, std::nullopt, opts);
}

IngestStats Store::ingest_diff(PackageId package, const vfs::Source& source, PackageId baseline,
                               vfs::WalkOptions opts) {
  return ingest(package, source, baseline, opts);
}

IngestStats Store::ingest(PackageId package, const vfs::Source& source, std::optional<PackageId> baseline,
                          vfs::WalkOptions opts) {
  if (!backend_->get_package(package))
    raise(ErrorCode::UnknownPackage, fmt::format("no package with id {}", value_of(package)));
  if (baseline) {
    if (!backend_->get_package(*baseline))
      raise(ErrorCode::UnknownPackage, fmt::format("no package with id {}", value_of(*baseline)));
    if (backend_->fingerprint_count(*baseline) == 0)
      raise(ErrorCode::EmptyBaseline, fmt::format("baseline package {} has no fingerprints", value_of(*baseline)));
  }

  // Zero-size files are always excluded; walk them anyway so they are counted.
  opts.skip_zero_size = false;
  IngestStats stats;
  transaction([&] {
    source.walk(opts, [&](const vfs::WalkEvent& ev) {
      if (const auto* issue = std::get_if<vfs::WalkIssue>(&ev)) {
        if (issue->kind == vfs::IssueKind::IoError) ++stats.read_errors;
        return;
      }
      const auto& entry = std::get<vfs::FileEntry>(ev);
      if (!entry.is_file()) return;
      ++stats.files_seen;
      if (entry.data_size == 0) {
        ++stats.zero_size_skipped;
        return;
      }
      Fingerprint fp;
      try {
        fp = {hash_entry(source, entry), entry.data_size};
      } catch (const Error&) {
        ++stats.read_errors;
        return;
      }
      if (baseline && backend_->package_has_fingerprint(*baseline, fp)) {
        ++stats.suppressed_as_baseline;
        return;
      }
      const auto [fp_id, inserted] = backend_->upsert_fingerprint(fp);
      if (inserted) ++stats.fingerprints_inserted;
      if (backend_->insert_link(package, fp_id, entry.name, entry.relative_path))
        ++stats.links_created;
      else
        ++stats.links_existing;
    });
  });
  return stats;
}

namespace {

// One record of quoted comma-separated values (RFC 4180 quoting, no
// embedded line breaks).
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (true) {
    std::string field;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) return std::nullopt;
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      if (i < line.size() && line[i] != ',') return std::nullopt;
    } else {
      while (i < line.size() && line[i] != ',') {
        if (line[i] == '"') return std::nullopt;
        field += line[i++];
      }
    }
    fields.push_back(std::move(field));
    if (i >= line.size()) break;
    ++i; // comma
  }
  return fields;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

} // namespace

IngestStats Store::import_rds(std::istream& in) {
  IngestStats stats;
  std::size_t line_no = 0;
  std::string line;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw ParseError(1, "missing header");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = split_csv(line);
  if (!header || !std::equal(header->begin(), header->end(), std::begin(kRdsColumns), std::end(kRdsColumns)))
    throw ParseError(1, "header must list exactly: MD5,FileName,FileSize,ProductName,ProductVersion,"
                        "OpSystemName,OpSystemVersion,Language");

  begin();
  try {
    std::map<std::pair<std::string, std::string>, OsId> os_cache;
    while (next_line()) {
      if (line.empty()) continue;
      const auto row = split_csv(line);
      if (!row) throw ParseError(line_no, "malformed quoting");
      if (row->size() != std::size(kRdsColumns))
        throw ParseError(line_no, fmt::format("expected {} columns, found {}", std::size(kRdsColumns), row->size()));
      const auto& r = *row;
      const std::string md5 = lowercase(r[0]);
      if (!is_md5_hex(md5)) throw ParseError(line_no, fmt::format("malformed MD5 '{}'", r[0]));
      std::uint64_t size = 0;
      const auto [ptr, ec] = std::from_chars(r[2].data(), r[2].data() + r[2].size(), size);
      if (ec != std::errc() || ptr != r[2].data() + r[2].size() || r[2].empty())
        throw ParseError(line_no, fmt::format("malformed FileSize '{}'", r[2]));
      if (r[1].empty()) throw ParseError(line_no, "empty FileName");
      if (r[3].empty()) throw ParseError(line_no, "empty ProductName");
      if (r[5].empty()) throw ParseError(line_no, "empty OpSystemName");

      ++stats.files_seen;
      if (size == 0) {
        ++stats.zero_size_skipped;
        continue;
      }
      auto key = std::make_pair(r[5], r[6]);
      auto it = os_cache.find(key);
      if (it == os_cache.end()) {
        auto id = backend_->find_os(r[5], r[6]);
        it = os_cache.emplace(key, id ? *id : backend_->insert_os(r[5], r[6])).first;
      }
      const OsId os = it->second;
      const auto kind = r[3] == r[5] ? PackageKind::OsBaseline : PackageKind::Application;
      auto pkg = backend_->find_package(r[3], r[4], r[7], os);
      if (!pkg) pkg = backend_->insert_package(r[3], r[4], r[7], os, kind);

      const auto [fp_id, inserted] = backend_->upsert_fingerprint({md5, size});
      if (inserted) ++stats.fingerprints_inserted;
      if (backend_->insert_link(*pkg, fp_id, r[1], r[1]))
        ++stats.links_created;
      else
        ++stats.links_existing;
    }
    if (in.bad()) throw ParseError(line_no + 1, "read failure");
    commit();
  } catch (const ParseError&) {
    rollback();
    throw;
  } catch (const std::exception& e) {
    rollback();
    throw ParseError(line_no, e.what());
  }
  return stats;
}

IngestStats Store::import_rds(const std::filesystem::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, fmt::format("cannot open '{}'", csv.string()));
  return import_rds(in);
}

std::vector<Hit> Store::lookup(std::string_view md5, std::optional<std::uint64_t> size) const {
  if (!is_md5_hex(md5)) raise(ErrorCode::InvalidArgument, fmt::format("malformed md5 '{}'", md5));
  std::vector<Hit> out;
  for (auto& raw : backend_->lookup(md5, size))
    out.push_back({descriptor_.name, raw.package_id, std::move(raw.package_name), std::move(raw.os_name),
                   std::move(raw.os_version), std::move(raw.filename)});
  return out;
}

std::vector<OperatingSystemRec> Store::operating_systems() const { return backend_->list_os(); }
std::vector<PackageRec> Store::packages() const { return backend_->list_packages(); }
std::optional<PackageRec> Store::package(PackageId id) const { return backend_->get_package(id); }
std::optional<OperatingSystemRec> Store::operating_system(OsId id) const { return backend_->get_os(id); }
std::uint64_t Store::fingerprint_count(PackageId id) const { return backend_->fingerprint_count(id); }
std::vector<Fingerprint> Store::linkset(PackageId id) const { return backend_->linkset(id); }
std::vector<PackageLink> Store::links(PackageId id) const { return backend_->links(id); }
StoreCounts Store::counts() const { return backend_->counts(); }

std::vector<Hit> lookup_md5(std::span<const Store* const> stores, std::string_view md5,
                            std::optional<std::uint64_t> size) {
  if (!is_md5_hex(md5)) raise(ErrorCode::InvalidArgument, fmt::format("malformed md5 '{}'", md5));
  std::set<std::string_view> names;
  for (const Store* s : stores)
    if (!names.insert(s->name()).second)
      raise(ErrorCode::InvalidArgument, fmt::format("store name '{}' attached twice", s->name()));
  std::vector<Hit> out;
  for (const Store* s : stores) {
    auto hits = s->lookup(md5, size);
    out.insert(out.end(), std::make_move_iterator(hits.begin()), std::make_move_iterator(hits.end()));
  }
  return out;
}

} // namespace rtriage::hashdb
