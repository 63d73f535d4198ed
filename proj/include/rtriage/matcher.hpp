#pragma once

#include <rtriage/hashdb.hpp>
#include <rtriage/timestamp.hpp>
#include <rtriage/vfs.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rtriage::matcher {

struct AnalysisConfig {
  std::string source_name;
  std::string examiner;
  bool include_rsrc_projection{false};
  unsigned parallelism{1};
  /// Pins the analysis date; the current time is used when empty.
  std::optional<Timestamp> started_at;
};

struct UnmatchedFile {
  std::string relative_path;
  std::uint64_t size{0};
  std::string md5;

  bool operator==(const UnmatchedFile&) const = default;
};

struct ReadErrorRow {
  std::string relative_path;
  std::string message;

  bool operator==(const ReadErrorRow&) const = default;
};

struct OsDetectionRow {
  std::string os_name;
  std::string os_version;
  std::uint64_t occurrences{0};
  std::string store_name;

  bool operator==(const OsDetectionRow&) const = default;
};

struct PackageRow {
  std::string store_name;
  hashdb::PackageId package_id{0};
  std::string name;
  std::string version;
  std::string language;
  std::string os_name;
  std::string os_version;
  /// round(100 * occurrences / fingerprint_count); may exceed 100.
  std::uint64_t occurrence_ratio_percent{0};
  /// round(100 * distinct matched fingerprints / fingerprint_count).
  std::uint64_t coverage_percent{0};
  std::uint64_t occurrences{0};
  std::uint64_t fingerprint_count{0};
  /// Paths of the matching file instances, in walk order.
  std::vector<std::string> matched_files;

  bool operator==(const PackageRow&) const = default;
};

struct Counters {
  std::uint64_t files_walked{0};
  std::uint64_t zero_size_skipped{0};
  std::uint64_t read_errors{0};
  std::uint64_t matched_instances{0};
  std::uint64_t unmatched{0};

  bool operator==(const Counters&) const = default;
};

struct AnalysisResult {
  AnalysisConfig config;
  Timestamp started_at;
  std::vector<hashdb::StoreDescriptor> databases;
  std::vector<UnmatchedFile> unmatched;
  std::vector<ReadErrorRow> read_errors;
  /// Folder listing failures met during the walk; they are not file entries.
  std::vector<vfs::WalkIssue> walk_issues;
  std::vector<OsDetectionRow> os_rows;
  /// Grouped by store in attachment order.
  std::vector<PackageRow> package_rows;
  Counters counters;

  /// Everything except config.parallelism, which must not affect output.
  bool same_tables(const AnalysisResult& other) const;
};

enum class Classification { Matched, Unmatched };

/// Unmatched iff every attached store returned zero hits.
Classification classify_file(std::span<const std::size_t> hits_per_store) noexcept;

/// Per-file result of the hash and lookup stage.
struct FileOutcome {
  std::string md5;
  std::optional<std::string> error;
  std::vector<std::vector<hashdb::Hit>> hits; // one list per store
};

/// Reference implementation of the hash and lookup stage.
std::vector<FileOutcome> process_serial(const vfs::Source& source, std::span<const vfs::FileEntry> files,
                                        std::span<const hashdb::Store* const> stores);

/// Same stage over an OpenMP worker pool; output order follows `files`.
std::vector<FileOutcome> process_parallel(const vfs::Source& source, std::span<const vfs::FileEntry> files,
                                          std::span<const hashdb::Store* const> stores, unsigned workers);

/// Throws NoStores, InvalidArgument for a duplicate store name or zero
/// parallelism, and IoError when the source itself cannot be walked.
AnalysisResult analyze(const vfs::Source& source, std::span<const hashdb::Store* const> stores,
                       const AnalysisConfig& config);

/// Integer percentage rounded half away from zero; 0 when `total` is 0.
std::uint64_t percent_rounded(std::uint64_t part, std::uint64_t total) noexcept;

} // namespace rtriage::matcher
