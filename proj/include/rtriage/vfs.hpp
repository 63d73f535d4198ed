#pragma once

#include <rtriage/byte_source.hpp>
#include <rtriage/hfs_volume.hpp>
#include <rtriage/timestamp.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

// Uniform walkable view over HFS images and host directory trees.
//
// With the resource-fork projection enabled, every directory holding at least
// one file with a non-empty resource fork gains a virtual ".rsrc" folder
// (emitted after the directory's real children) containing one file per such
// fork. Reading a projected file yields the resource fork of the file it
// shadows.
namespace rtriage::vfs {

inline constexpr std::string_view kRsrcDirName = ".rsrc";

enum class SourceKind { Hfs, Directory };
enum class KindHint { Auto, Hfs, Directory };
enum class EntryKind { File, Folder };

struct FileEntry {
  std::string relative_path; // '/' separated, "" for the root
  std::string name;
  EntryKind kind{EntryKind::File};
  std::uint64_t data_size{0};
  std::uint64_t rsrc_size{0};
  std::optional<Timestamp> created;
  std::optional<Timestamp> modified;
  std::optional<Timestamp> accessed;
  std::optional<std::string> type_code;
  std::optional<std::string> creator_code;
  std::string origin;

  // Locator back into the source.
  bool rsrc_projection{false};
  std::uint32_t node_id{0};

  bool is_file() const noexcept { return kind == EntryKind::File; }
  bool operator==(const FileEntry&) const = default;
};

struct WalkOptions {
  bool skip_zero_size{false};
  bool include_rsrc_projection{false};
  /// Entries deeper than this many path components are not emitted.
  std::optional<std::size_t> depth_limit;
};

enum class IssueKind { IoError, Warning };

struct WalkIssue {
  IssueKind kind{IssueKind::Warning};
  std::string relative_path;
  std::string message;

  bool operator==(const WalkIssue&) const = default;
};

using WalkEvent = std::variant<FileEntry, WalkIssue>;
using WalkSink = std::function<void(const WalkEvent&)>;

/// Sequential reader delivering exactly the entry's advertised size.
class EntryStream {
 public:
  virtual ~EntryStream() = default;
  virtual std::uint64_t size() const = 0;
  /// Returns 0 once the advertised size has been delivered.
  virtual std::size_t read(std::span<std::uint8_t> out) = 0;
};

class SourceBackend;

/// Read-only handle over one source. Copies share state; walks and reads
/// may run concurrently.
class Source {
 public:
  explicit Source(std::shared_ptr<const SourceBackend> backend);

  SourceKind kind() const;
  const std::string& origin() const;

  /// The parsed volume for HFS sources, nullptr otherwise.
  const hfs::Volume* volume() const;

  /// Depth-first; children in byte-wise ascending name order. Listing
  /// failures become IoError issues and the walk continues.
  void walk(const WalkOptions& opts, const WalkSink& sink) const;
  std::vector<WalkEvent> walk(const WalkOptions& opts) const;

  std::unique_ptr<EntryStream> open_entry(const FileEntry& entry) const;
  Bytes read_entry(const FileEntry& entry) const;

 private:
  std::shared_ptr<const SourceBackend> backend_;
};

Source open_source(const std::filesystem::path& locator, KindHint hint = KindHint::Auto);

/// HFS source over an already loaded image (tests, in-memory fixtures).
Source open_hfs_source(std::shared_ptr<const ByteSource> image, std::string origin);

/// Convenience filters over a collected walk.
std::vector<FileEntry> entries_of(const std::vector<WalkEvent>& events);
std::vector<WalkIssue> issues_of(const std::vector<WalkEvent>& events);

} // namespace rtriage::vfs
