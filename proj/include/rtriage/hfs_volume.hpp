#pragma once

#include <rtriage/byte_source.hpp>
#include <rtriage/timestamp.hpp>

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Read-only access to classic HFS volumes: the master directory block, the
// catalog and extents-overflow B-trees, and both forks of every file.
namespace rtriage::hfs {

inline constexpr std::uint16_t kSignature = 0x4244; // 'BD'
inline constexpr std::uint64_t kMdbOffset = 1024;
inline constexpr std::uint64_t kSectorSize = 512;

/// Seconds since 1904-01-01T00:00:00, interpreted as UTC.
struct HfsDate {
  std::uint32_t raw{0};

  auto operator<=>(const HfsDate&) const = default;
};

Timestamp to_timestamp(HfsDate date);

enum class CatalogNodeId : std::uint32_t {};

inline constexpr CatalogNodeId kRootParentId{1};
inline constexpr CatalogNodeId kRootFolderId{2};
inline constexpr CatalogNodeId kExtentsFileId{3};
inline constexpr CatalogNodeId kCatalogFileId{4};

constexpr std::uint32_t value_of(CatalogNodeId id) noexcept {
  return static_cast<std::uint32_t>(id);
}

struct ExtentDescriptor {
  std::uint16_t start_block{0};
  std::uint16_t block_count{0};

  bool operator==(const ExtentDescriptor&) const = default;
};

using ExtentRecord = std::array<ExtentDescriptor, 3>;

struct ForkLocator {
  std::uint32_t logical_size{0};
  ExtentRecord extents{};
};

struct MasterDirectoryBlock {
  std::uint16_t signature{0};
  std::string volume_name;
  HfsDate creation_date;
  HfsDate modification_date;
  std::uint16_t root_file_count{0};
  std::uint16_t bitmap_start{0};
  std::uint16_t allocation_block_count{0};
  std::uint32_t allocation_block_size{0};
  std::uint16_t first_allocation_block{0};
  std::uint32_t next_catalog_id{0};
  std::uint16_t free_blocks{0};
  std::uint32_t file_count{0};
  std::uint32_t folder_count{0};
  ForkLocator extents_overflow_file;
  ForkLocator catalog_file;
};

enum class RecordKind { Folder, File, Thread };

enum class Fork { Data, Resource };

struct FourCC {
  std::array<std::uint8_t, 4> bytes{};

  /// MacRoman-decoded.
  std::string str() const;

  bool operator==(const FourCC&) const = default;
};

struct FolderInfo {
  std::uint16_t valence{0};
  HfsDate created;
  HfsDate modified;
};

struct FileInfo {
  FourCC type_code;
  FourCC creator_code;
  std::uint16_t finder_flags{0};
  std::uint32_t data_size{0};
  std::uint32_t data_physical_size{0};
  std::uint32_t rsrc_size{0};
  std::uint32_t rsrc_physical_size{0};
  ExtentRecord data_extents{};
  ExtentRecord rsrc_extents{};
  HfsDate created;
  HfsDate modified;
  HfsDate backed_up;

  std::uint32_t size(Fork fork) const noexcept { return fork == Fork::Data ? data_size : rsrc_size; }
};

/// One catalog entry. `name` is the presentation form: UTF-8, with any '/'
/// in the on-disk name shown as ':'. `raw_name` keeps the MacRoman bytes.
struct CatalogRecord {
  RecordKind kind{RecordKind::Folder};
  CatalogNodeId id{0};
  CatalogNodeId parent_id{0};
  std::string name;
  std::string raw_name;
  std::optional<FolderInfo> folder;
  std::optional<FileInfo> file;

  bool is_file() const noexcept { return kind == RecordKind::File; }
  bool is_folder() const noexcept { return kind == RecordKind::Folder; }
};

/// A parsed volume. Copies share the same immutable state; every const
/// member may be called concurrently.
class Volume {
 public:
  const MasterDirectoryBlock& mdb() const noexcept;

  /// Byte offset of the volume inside the image (non-zero behind a
  /// partition map).
  std::uint64_t volume_offset() const noexcept;

  const ByteSource& image() const noexcept;

  CatalogRecord root() const;

  /// Folder or file by catalog id. Throws UnknownId.
  const CatalogRecord& record(CatalogNodeId id) const;

  /// Immediate children in catalog key order.
  std::vector<CatalogRecord> list_children(CatalogNodeId folder_id) const;

  /// '/'-separated path from the root, compared case-insensitively.
  CatalogRecord lookup(std::string_view path) const;

  Bytes read_fork(const CatalogRecord& file, Fork fork, std::uint64_t offset, std::uint64_t length) const;

  /// File and folder records in the catalog; forces the catalog load.
  std::size_t record_count() const;

  struct Impl;

 private:
  explicit Volume(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend Volume open_volume(std::shared_ptr<const ByteSource> image);
  friend class ForkReader;
};

/// Maps logical fork offsets to image offsets through the inline extents and
/// the extents-overflow tree. Built once per fork; reads are const.
class ForkReader {
 public:
  ForkReader(const Volume& volume, const CatalogRecord& file, Fork fork);

  std::uint64_t size() const noexcept { return size_; }

  /// Reads min(out.size(), size() - offset) bytes; returns the count.
  std::size_t read(std::uint64_t offset, std::span<std::uint8_t> out) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
  std::uint64_t size_{0};
};

Volume open_volume(std::shared_ptr<const ByteSource> image);
Volume open_volume(const std::filesystem::path& image_path);

/// Offset of an HFS volume inside `image`: 0 when the MDB signature sits at
/// byte 1024, otherwise the start of the first Apple_HFS partition-map entry
/// found at a 512-byte boundary within the first MiB. nullopt if neither.
std::optional<std::uint64_t> find_volume_offset(const ByteSource& image);

} // namespace rtriage::hfs
