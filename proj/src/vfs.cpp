#include <rtriage/vfs.hpp>

#include <rtriage/error.hpp>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <sys/stat.h>

#include <fmt/format.h>

namespace rtriage::vfs {

namespace fs = std::filesystem;

struct Listing {
  std::vector<FileEntry> entries;
  std::vector<WalkIssue> issues;
};

class SourceBackend {
 public:
  virtual ~SourceBackend() = default;

  virtual SourceKind kind() const = 0;
  virtual FileEntry root() const = 0;
  /// Children of a folder entry, unsorted; relative paths are left empty.
  virtual Listing list(const FileEntry& folder) const = 0;
  virtual std::unique_ptr<EntryStream> open(const FileEntry& entry) const = 0;
  virtual const hfs::Volume* volume() const { return nullptr; }

  std::string origin;
};

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

bool usable_name(const std::string& name) {
  return !name.empty() && name != "." && name != ".." && name.find('/') == std::string::npos &&
         name.find('\0') == std::string::npos;
}

// HFS ----------------------------------------------------------------------

class HfsStream final : public EntryStream {
 public:
  HfsStream(hfs::ForkReader reader)
      : reader_(std::move(reader)) {}

  std::uint64_t size() const override { return reader_.size(); }

  std::size_t read(std::span<std::uint8_t> out) override {
    std::size_t n = reader_.read(pos_, out);
    pos_ += n;
    return n;
  }

 private:
  hfs::ForkReader reader_;
  std::uint64_t pos_{0};
};

class HfsBackend final : public SourceBackend {
 public:
  explicit HfsBackend(hfs::Volume volume)
      : volume_(std::move(volume)) {}

  SourceKind kind() const override { return SourceKind::Hfs; }

  const hfs::Volume* volume() const override { return &volume_; }

  FileEntry root() const override {
    FileEntry e = to_entry(volume_.root());
    e.name.clear();
    return e;
  }

  Listing list(const FileEntry& folder) const override {
    Listing out;
    for (const auto& rec : volume_.list_children(hfs::CatalogNodeId{folder.node_id})) {
      out.entries.push_back(to_entry(rec));
    }
    return out;
  }

  std::unique_ptr<EntryStream> open(const FileEntry& entry) const override {
    const hfs::CatalogRecord* rec = nullptr;
    try {
      rec = &volume_.record(hfs::CatalogNodeId{entry.node_id});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnknownId) {
        raise(ErrorCode::Gone, fmt::format("'{}' no longer resolves", entry.relative_path));
      }
      throw;
    }
    if (!rec->is_file()) {
      raise(ErrorCode::Gone, fmt::format("'{}' no longer names a file", entry.relative_path));
    }
    hfs::ForkReader reader(volume_, *rec, entry.rsrc_projection ? hfs::Fork::Resource : hfs::Fork::Data);
    if (reader.size() != entry.data_size) {
      raise(ErrorCode::Gone, fmt::format("'{}' changed size", entry.relative_path));
    }
    return std::make_unique<HfsStream>(std::move(reader));
  }

 private:
  FileEntry to_entry(const hfs::CatalogRecord& rec) const {
    FileEntry e;
    e.name = rec.name;
    e.node_id = hfs::value_of(rec.id);
    e.origin = origin;
    if (rec.is_file()) {
      const auto& f = *rec.file;
      e.kind = EntryKind::File;
      e.data_size = f.data_size;
      e.rsrc_size = f.rsrc_size;
      e.created = hfs::to_timestamp(f.created);
      e.modified = hfs::to_timestamp(f.modified);
      e.type_code = f.type_code.str();
      e.creator_code = f.creator_code.str();
    } else {
      e.kind = EntryKind::Folder;
      e.created = hfs::to_timestamp(rec.folder->created);
      e.modified = hfs::to_timestamp(rec.folder->modified);
    }
    return e;
  }

  hfs::Volume volume_;
};

// Host directory --------------------------------------------------------------

Timestamp from_timespec(const struct timespec& ts) {
  return Timestamp{std::chrono::seconds{ts.tv_sec}};
}

class FileStream final : public EntryStream {
 public:
  FileStream(const fs::path& path, std::uint64_t size)
      : in_(path, std::ios::binary)
      , path_(path)
      , size_(size) {
    if (!in_) {
      raise(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
    }
  }

  std::uint64_t size() const override { return size_; }

  std::size_t read(std::span<std::uint8_t> out) override {
    std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), size_ - pos_));
    if (want == 0) {
      return 0;
    }
    in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(want));
    auto got = static_cast<std::size_t>(in_.gcount());
    if (got != want) {
      raise(ErrorCode::IoError, fmt::format("{} shrank while reading", path_.string()));
    }
    pos_ += got;
    return got;
  }

 private:
  std::ifstream in_;
  fs::path path_;
  std::uint64_t size_;
  std::uint64_t pos_{0};
};

class DirBackend final : public SourceBackend {
 public:
  explicit DirBackend(fs::path root)
      : root_(std::move(root)) {}

  SourceKind kind() const override { return SourceKind::Directory; }

  FileEntry root() const override {
    FileEntry e;
    e.kind = EntryKind::Folder;
    e.origin = origin;
    return e;
  }

  Listing list(const FileEntry& folder) const override {
    Listing out;
    fs::path dir = root_ / fs::path(folder.relative_path);
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) {
      raise(ErrorCode::IoError, fmt::format("cannot list {}: {}", dir.string(), ec.message()));
    }
    for (const auto& de : it) {
      std::string name = de.path().filename().string();
      struct stat st{};
      if (::lstat(de.path().c_str(), &st) != 0) {
        out.issues.push_back({IssueKind::IoError, join(folder.relative_path, name), std::strerror(errno)});
        continue;
      }
      FileEntry e;
      e.name = name;
      e.origin = origin;
      e.modified = from_timespec(st.st_mtim);
      e.accessed = from_timespec(st.st_atim);
      if (S_ISDIR(st.st_mode)) {
        e.kind = EntryKind::Folder;
      } else if (S_ISREG(st.st_mode)) {
        e.kind = EntryKind::File;
        e.data_size = static_cast<std::uint64_t>(st.st_size);
      } else {
        out.issues.push_back({IssueKind::Warning, join(folder.relative_path, name),
                              "not a regular file or directory; skipped"});
        continue;
      }
      out.entries.push_back(std::move(e));
    }
    return out;
  }

  std::unique_ptr<EntryStream> open(const FileEntry& entry) const override {
    fs::path path = root_ / fs::path(entry.relative_path);
    struct stat st{};
    if (::lstat(path.c_str(), &st) != 0 || !S_ISREG(st.st_mode)) {
      raise(ErrorCode::Gone, fmt::format("'{}' no longer resolves to a file", entry.relative_path));
    }
    if (static_cast<std::uint64_t>(st.st_size) != entry.data_size) {
      raise(ErrorCode::IoError, fmt::format("'{}' changed size since the walk", entry.relative_path));
    }
    return std::make_unique<FileStream>(path, entry.data_size);
  }

 private:
  fs::path root_;
};

// Walker ---------------------------------------------------------------------

class Walker {
 public:
  Walker(const SourceBackend& backend, const WalkOptions& opts, const WalkSink& sink)
      : backend_(backend)
      , opts_(opts)
      , sink_(sink) {}

  void run() {
    FileEntry root = backend_.root();
    visited_.insert(root.node_id);
    walk_folder(root, 0);
  }

 private:
  bool within_limit(std::size_t depth) const { return !opts_.depth_limit || depth <= *opts_.depth_limit; }

  void walk_folder(const FileEntry& folder, std::size_t depth) {
    if (!within_limit(depth + 1)) {
      return;
    }
    Listing listing;
    try {
      listing = backend_.list(folder);
    } catch (const Error& e) {
      sink_(WalkIssue{IssueKind::IoError, folder.relative_path, e.what()});
      return;
    }
    for (auto& issue : listing.issues) {
      sink_(issue);
    }
    auto& kids = listing.entries;
    std::sort(kids.begin(), kids.end(), [](const FileEntry& a, const FileEntry& b) { return a.name < b.name; });

    bool real_rsrc_dir = false;
    std::vector<const FileEntry*> forks;
    for (auto& kid : kids) {
      kid.relative_path = join(folder.relative_path, kid.name);
      if (!usable_name(kid.name)) {
        sink_(WalkIssue{IssueKind::Warning, kid.relative_path, fmt::format("unusable name '{}'; skipped", kid.name)});
        continue;
      }
      real_rsrc_dir = real_rsrc_dir || kid.name == kRsrcDirName;
      if (kid.is_file()) {
        if (kid.rsrc_size > 0) {
          forks.push_back(&kid);
        }
        if (!(opts_.skip_zero_size && kid.data_size == 0)) {
          sink_(kid);
        }
        continue;
      }
      sink_(kid);
      if (backend_.kind() == SourceKind::Hfs && !visited_.insert(kid.node_id).second) {
        sink_(WalkIssue{IssueKind::IoError, kid.relative_path, "folder revisited; catalog cycle"});
        continue;
      }
      walk_folder(kid, depth + 1);
    }

    if (!opts_.include_rsrc_projection || forks.empty()) {
      return;
    }
    std::string rsrc_path = join(folder.relative_path, std::string(kRsrcDirName));
    if (real_rsrc_dir) {
      sink_(WalkIssue{IssueKind::Warning, rsrc_path, "a real .rsrc item exists; resource-fork projection suppressed"});
      return;
    }
    FileEntry dir;
    dir.relative_path = rsrc_path;
    dir.name = std::string(kRsrcDirName);
    dir.kind = EntryKind::Folder;
    dir.origin = folder.origin;
    dir.rsrc_projection = true;
    dir.node_id = folder.node_id;
    dir.created = folder.created;
    dir.modified = folder.modified;
    sink_(dir);
    if (!within_limit(depth + 2)) {
      return;
    }
    for (const FileEntry* f : forks) {
      FileEntry v = *f;
      v.relative_path = join(rsrc_path, f->name);
      v.data_size = f->rsrc_size;
      v.rsrc_size = 0;
      v.rsrc_projection = true;
      sink_(v);
    }
  }

  const SourceBackend& backend_;
  const WalkOptions& opts_;
  const WalkSink& sink_;
  std::unordered_set<std::uint32_t> visited_;
};

} // namespace

Source::Source(std::shared_ptr<const SourceBackend> backend)
    : backend_(std::move(backend)) {}

SourceKind Source::kind() const {
  return backend_->kind();
}

const std::string& Source::origin() const {
  return backend_->origin;
}

const hfs::Volume* Source::volume() const {
  return backend_->volume();
}

void Source::walk(const WalkOptions& opts, const WalkSink& sink) const {
  if (opts.depth_limit && *opts.depth_limit < 1) {
    raise(ErrorCode::InvalidArgument, "depth limit must be at least 1");
  }
  Walker(*backend_, opts, sink).run();
}

std::vector<WalkEvent> Source::walk(const WalkOptions& opts) const {
  std::vector<WalkEvent> out;
  walk(opts, [&out](const WalkEvent& ev) { out.push_back(ev); });
  return out;
}

std::unique_ptr<EntryStream> Source::open_entry(const FileEntry& entry) const {
  if (!entry.is_file()) {
    raise(ErrorCode::InvalidArgument, fmt::format("'{}' is a folder", entry.relative_path));
  }
  if (entry.origin != backend_->origin) {
    raise(ErrorCode::InvalidArgument, fmt::format("'{}' comes from another source", entry.relative_path));
  }
  return backend_->open(entry);
}

Bytes Source::read_entry(const FileEntry& entry) const {
  auto stream = open_entry(entry);
  Bytes out(static_cast<std::size_t>(stream->size()));
  std::size_t done = 0;
  while (done < out.size()) {
    std::size_t n = stream->read(std::span(out).subspan(done));
    if (n == 0) {
      raise(ErrorCode::IoError, fmt::format("'{}' ended early", entry.relative_path));
    }
    done += n;
  }
  return out;
}

Source open_hfs_source(std::shared_ptr<const ByteSource> image, std::string origin) {
  auto backend = std::make_shared<HfsBackend>(hfs::open_volume(std::move(image)));
  backend->origin = std::move(origin);
  return Source(std::move(backend));
}

Source open_source(const fs::path& locator, KindHint hint) {
  std::error_code ec;
  auto status = fs::status(locator, ec);
  if (ec || !fs::exists(status)) {
    raise(ErrorCode::IoError, fmt::format("cannot access {}", locator.string()));
  }
  std::string origin = locator.string();
  if (hint != KindHint::Hfs && fs::is_directory(status)) {
    auto backend = std::make_shared<DirBackend>(locator);
    backend->origin = origin;
    return Source(std::move(backend));
  }
  if (hint == KindHint::Directory) {
    raise(ErrorCode::UnrecognizedSource, fmt::format("{} is not a directory", origin));
  }
  if (fs::is_directory(status)) {
    raise(ErrorCode::UnrecognizedSource, fmt::format("{} is a directory, not an HFS image", origin));
  }
  auto image = open_file_source(locator);
  if (hint == KindHint::Auto && !hfs::find_volume_offset(*image)) {
    raise(ErrorCode::UnrecognizedSource, fmt::format("{} is neither an HFS image nor a directory", origin));
  }
  return open_hfs_source(std::move(image), origin);
}

std::vector<FileEntry> entries_of(const std::vector<WalkEvent>& events) {
  std::vector<FileEntry> out;
  for (const auto& ev : events) {
    if (const auto* e = std::get_if<FileEntry>(&ev)) {
      out.push_back(*e);
    }
  }
  return out;
}

std::vector<WalkIssue> issues_of(const std::vector<WalkEvent>& events) {
  std::vector<WalkIssue> out;
  for (const auto& ev : events) {
    if (const auto* i = std::get_if<WalkIssue>(&ev)) {
      out.push_back(*i);
    }
  }
  return out;
}

} // namespace rtriage::vfs
