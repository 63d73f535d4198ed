#pragma once

#include <rtriage/byte_source.hpp>
#include <rtriage/fixtures.hpp>
#include <rtriage/hashdb.hpp>
#include <rtriage/matcher.hpp>
#include <rtriage/vfs.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rtriage::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(std::string_view name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_file(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);
std::string as_string(const Bytes& b);
Bytes as_bytes(std::string_view s);

std::shared_ptr<const MemorySource> image_of(const fixtures::FixtureSpec& spec, std::uint64_t seed = 0);
vfs::Source fixture_source(const fixtures::FixtureSpec& spec, std::uint64_t seed = 0);

/// Fails every read that overlaps [begin, end) with IoError.
class FaultySource final : public ByteSource {
 public:
  FaultySource(std::shared_ptr<const ByteSource> inner, std::uint64_t begin, std::uint64_t end);
  std::uint64_t size() const override { return inner_->size(); }
  void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;

 private:
  std::shared_ptr<const ByteSource> inner_;
  std::uint64_t begin_;
  std::uint64_t end_;
};

/// MD5 computed by the coreutils md5sum binary.
std::string md5sum_of(const fs::path& file);

// Naive recount of an analysis: every link of every package is loaded into
// memory and each file is compared against all of them.
struct OracleFile {
  std::string path;   // '/' separated, relative
  std::string content;
};

struct OracleTables {
  std::vector<matcher::UnmatchedFile> unmatched;
  std::vector<matcher::OsDetectionRow> os_rows;
  std::vector<matcher::PackageRow> package_rows;
  std::uint64_t matched = 0;
};

OracleTables brute_force(const std::vector<OracleFile>& files, const std::vector<const hashdb::Store*>& stores);

/// Orders '/'-separated paths the way a depth-first walk with byte-wise
/// sorted siblings emits them.
bool walk_order_less(const std::string& a, const std::string& b);

/// Random directory tree plus stores sharing part of its content pool.
struct SyntheticCase {
  std::vector<OracleFile> files;
  std::vector<std::unique_ptr<hashdb::Store>> stores;
};

SyntheticCase make_synthetic_case(std::uint64_t seed, const fs::path& dir, std::size_t max_files = 200);

} // namespace rtriage::testing
