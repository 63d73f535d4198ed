#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace rtriage {

using Bytes = std::vector<std::uint8_t>;

/// Random-access, read-only view over an image. Implementations must allow
/// concurrent read_at calls.
class ByteSource {
 public:
  virtual ~ByteSource() = default;

  virtual std::uint64_t size() const = 0;

  /// Fills `out` from `offset`. Throws Truncated when the range leaves
  /// [0, size()), IoError on a failed read.
  virtual void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const = 0;

  Bytes read(std::uint64_t offset, std::size_t length) const;
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(Bytes data);

  std::uint64_t size() const override { return data_.size(); }
  void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;

  const Bytes& data() const noexcept { return data_; }

 private:
  Bytes data_;
};

/// pread-backed file; the descriptor is opened O_RDONLY.
class FileSource final : public ByteSource {
 public:
  explicit FileSource(const std::filesystem::path& path);
  ~FileSource() override;
  FileSource(const FileSource&) = delete;
  FileSource& operator=(const FileSource&) = delete;

  std::uint64_t size() const override { return size_; }
  void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;

 private:
  int fd_{-1};
  std::uint64_t size_{0};
};

std::shared_ptr<const ByteSource> open_file_source(const std::filesystem::path& path);

} // namespace rtriage
