#include <rtriage/byte_source.hpp>

#include <rtriage/error.hpp>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fmt/format.h>

namespace rtriage {

namespace {

void check_range(std::uint64_t offset, std::size_t length, std::uint64_t size) {
  if (offset > size || length > size - offset) {
    raise(ErrorCode::Truncated,
          fmt::format("read of {} bytes at offset {} exceeds image size {}", length, offset, size));
  }
}

} // namespace

Bytes ByteSource::read(std::uint64_t offset, std::size_t length) const {
  Bytes out(length);
  read_at(offset, out);
  return out;
}

MemorySource::MemorySource(Bytes data)
    : data_(std::move(data)) {}

void MemorySource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const {
  check_range(offset, out.size(), data_.size());
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(offset), out.size(), out.begin());
}

FileSource::FileSource(const std::filesystem::path& path) {
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) {
    raise(ErrorCode::IoError, fmt::format("cannot open {}: {}", path.string(), std::strerror(errno)));
  }
  struct stat st{};
  if (::fstat(fd_, &st) != 0) {
    int err = errno;
    ::close(fd_);
    raise(ErrorCode::IoError, fmt::format("cannot stat {}: {}", path.string(), std::strerror(err)));
  }
  size_ = static_cast<std::uint64_t>(st.st_size);
}

FileSource::~FileSource() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void FileSource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const {
  check_range(offset, out.size(), size_);
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      raise(ErrorCode::IoError, fmt::format("pread failed: {}", std::strerror(errno)));
    }
    if (n == 0) {
      raise(ErrorCode::Truncated, "unexpected end of file");
    }
    done += static_cast<std::size_t>(n);
  }
}

std::shared_ptr<const ByteSource> open_file_source(const std::filesystem::path& path) {
  return std::make_shared<FileSource>(path);
}

} // namespace rtriage
