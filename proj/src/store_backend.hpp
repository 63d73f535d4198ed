#pragma once

#include <rtriage/hashdb.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace rtriage::hashdb {

using FingerprintRowId = std::int64_t;

struct RawHit {
  PackageId package_id{0};
  std::string package_name;
  std::string os_name;
  std::string os_version;
  std::string filename;
};

/// Storage primitives behind Store. The ingestion rules live in Store so a
/// networked backend only has to provide these.
class StoreBackend {
 public:
  virtual ~StoreBackend() = default;

  virtual StoreDescriptor descriptor() const = 0;

  virtual void begin() = 0;
  virtual void commit() = 0;
  virtual void rollback() noexcept = 0;

  virtual std::optional<OsId> find_os(std::string_view name, std::string_view version) const = 0;
  virtual OsId insert_os(std::string_view name, std::string_view version) = 0;
  virtual std::optional<OperatingSystemRec> get_os(OsId id) const = 0;
  virtual std::vector<OperatingSystemRec> list_os() const = 0;

  virtual std::optional<PackageId> find_package(std::string_view name, std::string_view version,
                                                std::string_view language, OsId os) const = 0;
  virtual PackageId insert_package(std::string_view name, std::string_view version, std::string_view language, OsId os,
                                   PackageKind kind) = 0;
  virtual std::optional<PackageRec> get_package(PackageId id) const = 0;
  virtual std::vector<PackageRec> list_packages() const = 0;

  /// Returns the row id and whether it was newly inserted.
  virtual std::pair<FingerprintRowId, bool> upsert_fingerprint(const Fingerprint& fp) = 0;
  /// True if the link is new.
  virtual bool insert_link(PackageId package, FingerprintRowId fp, std::string_view filename,
                           std::string_view relative_path) = 0;
  virtual bool package_has_fingerprint(PackageId package, const Fingerprint& fp) const = 0;

  virtual std::vector<RawHit> lookup(std::string_view md5, std::optional<std::uint64_t> size) const = 0;
  virtual std::uint64_t fingerprint_count(PackageId package) const = 0;
  virtual std::vector<Fingerprint> linkset(PackageId package) const = 0;
  virtual std::vector<PackageLink> links(PackageId package) const = 0;
  virtual StoreCounts counts() const = 0;
};

std::shared_ptr<StoreBackend> create_sqlite_store(const std::filesystem::path& path,
                                                  const StoreDescriptor& descriptor);
std::shared_ptr<StoreBackend> open_sqlite_store(const std::filesystem::path& path, OpenMode mode);

} // namespace rtriage::hashdb
