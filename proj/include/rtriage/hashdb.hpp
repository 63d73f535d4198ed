#pragma once

#include <rtriage/vfs.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Reference fingerprint store: operating systems, packages (an OS baseline
// or one application install), fingerprints identified by (md5, size), and
// the links between packages and fingerprints.
namespace rtriage::hashdb {

struct StoreDescriptor {
  std::string name;
  std::string version_label;

  bool operator==(const StoreDescriptor&) const = default;
};

enum class OsId : std::int64_t {};
enum class PackageId : std::int64_t {};

constexpr std::int64_t value_of(OsId id) noexcept { return static_cast<std::int64_t>(id); }
constexpr std::int64_t value_of(PackageId id) noexcept { return static_cast<std::int64_t>(id); }

enum class PackageKind { OsBaseline, Application };

std::string_view to_string(PackageKind kind) noexcept;
std::optional<PackageKind> parse_package_kind(std::string_view text) noexcept;

struct OperatingSystemRec {
  OsId os_id{0};
  std::string name;
  std::string version;

  bool operator==(const OperatingSystemRec&) const = default;
};

struct PackageRec {
  PackageId package_id{0};
  std::string name;
  std::string version;
  std::string language;
  OsId os_ref{0};
  PackageKind kind{PackageKind::Application};

  bool operator==(const PackageRec&) const = default;
};

struct Fingerprint {
  std::string md5;
  std::uint64_t size{0};

  auto operator<=>(const Fingerprint&) const = default;
};

struct PackageLink {
  PackageId package_id{0};
  Fingerprint fingerprint;
  std::string filename;
  std::string relative_path;

  bool operator==(const PackageLink&) const = default;
};

struct IngestStats {
  std::uint64_t files_seen{0};
  std::uint64_t fingerprints_inserted{0};
  std::uint64_t links_created{0};
  std::uint64_t links_existing{0};
  std::uint64_t zero_size_skipped{0};
  std::uint64_t read_errors{0};
  std::uint64_t suppressed_as_baseline{0};

  bool operator==(const IngestStats&) const = default;
};

struct Hit {
  std::string store_name;
  PackageId package_id{0};
  std::string package_name;
  std::string os_name;
  std::string os_version;
  std::string filename;

  bool operator==(const Hit&) const = default;
};

struct StoreCounts {
  std::uint64_t operating_systems{0};
  std::uint64_t packages{0};
  std::uint64_t fingerprints{0};
  std::uint64_t links{0};
};

class StoreBackend;

enum class OpenMode { ReadOnly, ReadWrite };

/// Handle on one store. Lookups may run concurrently; writers are serialised
/// by the backend.
class Store {
 public:
  /// Creates a new store; AlreadyExists if `path` exists.
  static Store init(const std::filesystem::path& path, const StoreDescriptor& descriptor);
  static Store open(const std::filesystem::path& path, OpenMode mode = OpenMode::ReadOnly);

  const StoreDescriptor& descriptor() const noexcept { return descriptor_; }
  const std::string& name() const noexcept { return descriptor_.name; }

  /// Idempotent on (name, version).
  OsId add_os(std::string_view name, std::string_view version);

  /// Idempotent on (name, version, language, os). Throws UnknownOs.
  PackageId add_package(std::string_view name, std::string_view version, std::string_view language, OsId os,
                        PackageKind kind);

  /// Fingerprints every non-empty file of `source` (including ".rsrc"
  /// projections when enabled) and links it to `package`.
  IngestStats ingest_source(PackageId package, const vfs::Source& source, vfs::WalkOptions opts = {});

  /// As ingest_source, but files already linked to `baseline` are skipped
  /// and counted in suppressed_as_baseline.
  IngestStats ingest_diff(PackageId package, const vfs::Source& source, PackageId baseline,
                          vfs::WalkOptions opts = {});

  /// Atomic import of the simplified RDS text format (see README).
  IngestStats import_rds(std::istream& in);
  IngestStats import_rds(const std::filesystem::path& csv);

  /// Adds one link directly; returns true if the link is new.
  bool link_file(PackageId package, const Fingerprint& fingerprint, std::string_view filename,
                 std::string_view relative_path);

  /// One hit per distinct (package, filename) link, ordered by package id
  /// then filename. `size` narrows the match to the full identity.
  std::vector<Hit> lookup(std::string_view md5, std::optional<std::uint64_t> size = std::nullopt) const;

  std::vector<OperatingSystemRec> operating_systems() const;
  std::vector<PackageRec> packages() const;
  std::optional<PackageRec> package(PackageId id) const;
  std::optional<OperatingSystemRec> operating_system(OsId id) const;

  /// Distinct fingerprints linked to the package.
  std::uint64_t fingerprint_count(PackageId id) const;
  std::vector<Fingerprint> linkset(PackageId id) const;
  std::vector<PackageLink> links(PackageId id) const;
  StoreCounts counts() const;

  /// Runs `body` in one transaction; rolls back if it throws.
  template <typename F>
  decltype(auto) transaction(F&& body);

 private:
  Store(std::shared_ptr<StoreBackend> backend, StoreDescriptor descriptor);

  IngestStats ingest(PackageId package, const vfs::Source& source, std::optional<PackageId> baseline,
                     vfs::WalkOptions opts);
  void begin();
  void commit();
  void rollback() noexcept;

  std::shared_ptr<StoreBackend> backend_;
  StoreDescriptor descriptor_;
};

template <typename F>
decltype(auto) Store::transaction(F&& body) {
  begin();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      commit();
    } else {
      decltype(auto) result = body();
      commit();
      return result;
    }
  } catch (...) {
    rollback();
    throw;
  }
}

/// Hits across stores, grouped per store in the given order. Throws
/// InvalidArgument for a malformed hash.
std::vector<Hit> lookup_md5(std::span<const Store* const> stores, std::string_view md5,
                            std::optional<std::uint64_t> size = std::nullopt);

/// MD5 of a file entry's full content, streamed.
std::string hash_entry(const vfs::Source& source, const vfs::FileEntry& entry);

/// Column set of the RDS import format, in order.
inline constexpr std::string_view kRdsColumns[] = {"MD5",          "FileName",     "FileSize",        "ProductName",
                                                   "ProductVersion", "OpSystemName", "OpSystemVersion", "Language"};

} // namespace rtriage::hashdb
