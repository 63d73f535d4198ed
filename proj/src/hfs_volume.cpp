#include <rtriage/hfs_volume.hpp>

#include <rtriage/error.hpp>
#include <rtriage/macroman.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace rtriage::hfs {

namespace {

constexpr std::uint16_t kPartitionMapSig = 0x504D; // 'PM'
constexpr std::uint16_t kDriverDescriptorSig = 0x4552; // 'ER'
constexpr std::uint64_t kPartitionScanLimit = 1024 * 1024;

constexpr std::int8_t kHeaderNode = 1;
constexpr std::int8_t kLeafNode = -1;

constexpr std::uint8_t kFolderRecord = 1;
constexpr std::uint8_t kFileRecord = 2;
constexpr std::uint8_t kFolderThreadRecord = 3;
constexpr std::uint8_t kFileThreadRecord = 4;

constexpr std::size_t kFolderRecordSize = 70;
constexpr std::size_t kFileRecordSize = 102;
constexpr std::size_t kThreadRecordSize = 46;

constexpr std::uint8_t kDataForkType = 0x00;
constexpr std::uint8_t kRsrcForkType = 0xFF;

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

ExtentRecord parse_extents(std::span<const std::uint8_t> b, std::size_t off) {
  ExtentRecord rec{};
  for (std::size_t i = 0; i < rec.size(); ++i) {
    rec[i].start_block = be16(b, off + 4 * i);
    rec[i].block_count = be16(b, off + 4 * i + 2);
  }
  return rec;
}

std::string decode_name(std::span<const std::uint8_t> raw) {
  std::string name = macroman::to_utf8(raw);
  std::replace(name.begin(), name.end(), '/', ':');
  return name;
}

struct OverflowKey {
  std::uint8_t fork_type;
  std::uint32_t file_id;
  std::uint16_t start_block;

  auto operator<=>(const OverflowKey&) const = default;
};

struct Run {
  std::uint64_t logical_block;
  std::uint64_t physical_offset;
  std::uint64_t block_count;
};

struct BTreeHeader {
  std::uint16_t depth{0};
  std::uint32_t root{0};
  std::uint32_t leaf_records{0};
  std::uint32_t first_leaf{0};
  std::uint32_t last_leaf{0};
  std::uint16_t node_size{0};
  std::uint16_t max_key_length{0};
  std::uint32_t total_nodes{0};
  std::uint32_t free_nodes{0};
};

struct CatalogIndex {
  std::unordered_map<std::uint32_t, CatalogRecord> by_id;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> children;
};

} // namespace

Timestamp to_timestamp(HfsDate date) {
  using namespace std::chrono;
  return sys_days{year{1904} / January / 1} + seconds{date.raw};
}

std::string FourCC::str() const {
  return macroman::to_utf8(bytes);
}

struct Volume::Impl {
  std::shared_ptr<const ByteSource> image;
  std::uint64_t base{0};
  MasterDirectoryBlock mdb;
  std::map<OverflowKey, ExtentRecord> overflow;
  std::vector<Run> catalog_runs;
  BTreeHeader catalog_header;

  mutable std::once_flag catalog_once;
  mutable std::unique_ptr<CatalogIndex> catalog;

  std::uint64_t allocation_start() const {
    return base + std::uint64_t{mdb.first_allocation_block} * kSectorSize;
  }

  // Maps a fork onto image runs. `out_of_range` is raised for extents that
  // leave the image; inconsistent extent chains raise CorruptExtents.
  std::vector<Run> map_fork(std::uint8_t fork_type, std::uint32_t file_id, std::uint64_t logical_size,
                            const ExtentRecord& inline_extents, bool use_overflow, ErrorCode out_of_range) const;

  void read_runs(const std::vector<Run>& runs, std::uint64_t offset, std::span<std::uint8_t> out,
                 ErrorCode out_of_range) const;

  const CatalogIndex& catalog_index() const;
};

std::vector<Run> Volume::Impl::map_fork(std::uint8_t fork_type, std::uint32_t file_id, std::uint64_t logical_size,
                                        const ExtentRecord& inline_extents, bool use_overflow,
                                        ErrorCode out_of_range) const {
  const std::uint64_t block_size = mdb.allocation_block_size;
  const std::uint64_t needed = (logical_size + block_size - 1) / block_size;
  std::vector<Run> runs;
  std::uint64_t covered = 0;

  auto add_record = [&](const ExtentRecord& rec) {
    for (const auto& ext : rec) {
      if (covered >= needed) {
        return;
      }
      if (ext.block_count == 0) {
        if (ext.start_block == 0) {
          return;
        }
        raise(ErrorCode::CorruptExtents, fmt::format("file {}: empty extent at block {}", file_id, ext.start_block));
      }
      std::uint64_t phys = allocation_start() + ext.start_block * block_size;
      std::uint64_t len = ext.block_count * block_size;
      if (phys > image->size() || len > image->size() - phys) {
        raise(out_of_range, fmt::format("file {}: extent {}+{} lies past the end of the image", file_id,
                                        ext.start_block, ext.block_count));
      }
      if (std::uint64_t{ext.start_block} + ext.block_count > mdb.allocation_block_count) {
        raise(ErrorCode::CorruptExtents,
              fmt::format("file {}: extent {}+{} beyond {} allocation blocks", file_id, ext.start_block,
                          ext.block_count, mdb.allocation_block_count));
      }
      runs.push_back(Run{covered, phys, ext.block_count});
      covered += ext.block_count;
    }
  };

  add_record(inline_extents);
  while (covered < needed) {
    if (!use_overflow) {
      raise(ErrorCode::CorruptExtents,
            fmt::format("file {}: {} bytes need {} blocks, extents cover {}", file_id, logical_size, needed, covered));
    }
    if (covered > 0xFFFF) {
      raise(ErrorCode::CorruptExtents, fmt::format("file {}: extent chain exceeds 65535 blocks", file_id));
    }
    auto it = overflow.find(OverflowKey{fork_type, file_id, static_cast<std::uint16_t>(covered)});
    if (it == overflow.end()) {
      raise(ErrorCode::CorruptExtents,
            fmt::format("file {}: no overflow extents at block {} (need {})", file_id, covered, needed));
    }
    std::uint64_t before = covered;
    add_record(it->second);
    if (covered == before) {
      raise(ErrorCode::CorruptExtents, fmt::format("file {}: empty overflow record", file_id));
    }
  }
  return runs;
}

void Volume::Impl::read_runs(const std::vector<Run>& runs, std::uint64_t offset, std::span<std::uint8_t> out,
                             ErrorCode out_of_range) const {
  const std::uint64_t block_size = mdb.allocation_block_size;
  std::size_t done = 0;
  while (done < out.size()) {
    std::uint64_t pos = offset + done;
    std::uint64_t block = pos / block_size;
    auto it = std::upper_bound(runs.begin(), runs.end(), block,
                               [](std::uint64_t b, const Run& r) { return b < r.logical_block; });
    if (it == runs.begin()) {
      raise(out_of_range, fmt::format("offset {} maps to no extent", pos));
    }
    const Run& run = *std::prev(it);
    if (block >= run.logical_block + run.block_count) {
      raise(out_of_range, fmt::format("offset {} maps to no extent", pos));
    }
    std::uint64_t within = pos - run.logical_block * block_size;
    std::uint64_t avail = run.block_count * block_size - within;
    std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(avail, out.size() - done));
    image->read_at(run.physical_offset + within, out.subspan(done, chunk));
    done += chunk;
  }
}

namespace {

// Node-level B-tree access over a mapped fork.
class BTreeReader {
 public:
  BTreeReader(const Volume::Impl& vol, const std::vector<Run>& runs, std::uint64_t fork_size, std::string_view name)
      : vol_(vol)
      , runs_(runs)
      , fork_size_(fork_size)
      , name_(name) {
    if (fork_size < kSectorSize) {
      corrupt("file too small for a header node");
    }
    Bytes first(kSectorSize);
    vol_.read_runs(runs_, 0, first, ErrorCode::Truncated);
    if (static_cast<std::int8_t>(first[8]) != kHeaderNode) {
      corrupt("node 0 is not a header node");
    }
    if (be16(first, 10) < 1) {
      corrupt("header node has no header record");
    }
    std::span<const std::uint8_t> rec(first.data() + 14, 106);
    header_.depth = be16(rec, 0);
    header_.root = be32(rec, 2);
    header_.leaf_records = be32(rec, 6);
    header_.first_leaf = be32(rec, 10);
    header_.last_leaf = be32(rec, 14);
    header_.node_size = be16(rec, 18);
    header_.max_key_length = be16(rec, 20);
    header_.total_nodes = be32(rec, 22);
    header_.free_nodes = be32(rec, 26);
    const auto ns = header_.node_size;
    if (ns < kSectorSize || ns > 32768 || (ns & (ns - 1)) != 0) {
      corrupt(fmt::format("invalid node size {}", ns));
    }
    if (header_.total_nodes == 0 || std::uint64_t{header_.total_nodes} * ns > fork_size_) {
      corrupt(fmt::format("{} nodes of {} bytes exceed file size {}", header_.total_nodes, ns, fork_size_));
    }
  }

  const BTreeHeader& header() const { return header_; }

  // Calls f(key_and_data) for every record of every leaf along the forward
  // chain starting at the header's first-leaf pointer.
  template <typename F>
  void for_each_leaf_record(F&& f) const {
    std::unordered_set<std::uint32_t> visited;
    std::uint32_t node = header_.first_leaf;
    Bytes buf(header_.node_size);
    while (node != 0) {
      if (node >= header_.total_nodes) {
        corrupt(fmt::format("leaf link to node {} beyond {} nodes", node, header_.total_nodes));
      }
      if (!visited.insert(node).second) {
        corrupt(fmt::format("leaf chain revisits node {}", node));
      }
      vol_.read_runs(runs_, std::uint64_t{node} * header_.node_size, buf, ErrorCode::Truncated);
      if (static_cast<std::int8_t>(buf[8]) != kLeafNode) {
        corrupt(fmt::format("node {} in leaf chain has type {}", node, static_cast<int>(static_cast<std::int8_t>(buf[8]))));
      }
      for_each_record(node, buf, f);
      node = be32(buf, 0);
    }
  }

  [[noreturn]] void corrupt(const std::string& what) const {
    raise(ErrorCode::CorruptCatalog, fmt::format("{} B-tree: {}", name_, what));
  }

 private:
  template <typename F>
  void for_each_record(std::uint32_t node, std::span<const std::uint8_t> buf, F& f) const {
    const std::size_t ns = buf.size();
    const std::size_t count = be16(buf, 10);
    const std::size_t table = 2 * (count + 1);
    if (14 + table > ns) {
      corrupt(fmt::format("node {} claims {} records", node, count));
    }
    auto offset_at = [&](std::size_t i) { return std::size_t{be16(buf, ns - 2 - 2 * i)}; };
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t begin = offset_at(i);
      std::size_t end = offset_at(i + 1);
      if (begin < 14 || end <= begin || end > ns - table) {
        corrupt(fmt::format("node {} record {} has bad bounds [{}, {})", node, i, begin, end));
      }
      f(buf.subspan(begin, end - begin));
    }
  }

  const Volume::Impl& vol_;
  const std::vector<Run>& runs_;
  std::uint64_t fork_size_;
  std::string_view name_;
  BTreeHeader header_;
};

void load_overflow(Volume::Impl& vol) {
  const auto& loc = vol.mdb.extents_overflow_file;
  auto runs = vol.map_fork(kDataForkType, value_of(kExtentsFileId), loc.logical_size, loc.extents, false,
                           ErrorCode::Truncated);
  BTreeReader tree(vol, runs, loc.logical_size, "extents");
  tree.for_each_leaf_record([&](std::span<const std::uint8_t> rec) {
    // keyLength(1) forkType(1) fileID(4) startBlock(2) then 3 extents.
    if (rec.size() < 8 + 12 || rec[0] < 7) {
      tree.corrupt(fmt::format("short extents record ({} bytes)", rec.size()));
    }
    std::size_t data = (1 + std::size_t{rec[0]} + 1) & ~std::size_t{1};
    if (data + 12 > rec.size()) {
      tree.corrupt("extents record data out of bounds");
    }
    OverflowKey key{rec[1], be32(rec, 2), be16(rec, 6)};
    vol.overflow.emplace(key, parse_extents(rec, data));
  });
}

CatalogRecord parse_catalog_record(std::span<const std::uint8_t> rec, const BTreeReader& tree, bool& skip) {
  skip = false;
  std::size_t key_length = rec[0];
  if (key_length == 0) {
    skip = true;
    return {};
  }
  if (key_length < 6 || 1 + key_length > rec.size()) {
    tree.corrupt(fmt::format("bad catalog key length {}", key_length));
  }
  std::size_t name_length = rec[6];
  if (name_length > 31 || 7 + name_length > 1 + key_length) {
    tree.corrupt(fmt::format("bad catalog name length {}", name_length));
  }
  CatalogRecord out;
  out.parent_id = CatalogNodeId{be32(rec, 2)};
  auto raw = rec.subspan(7, name_length);
  out.raw_name.assign(raw.begin(), raw.end());
  out.name = decode_name(raw);

  std::size_t data_offset = (1 + key_length + 1) & ~std::size_t{1};
  if (data_offset >= rec.size()) {
    tree.corrupt("catalog record without data");
  }
  auto data = rec.subspan(data_offset);
  auto need = [&](std::size_t n) {
    if (data.size() < n) {
      tree.corrupt(fmt::format("catalog record type {} needs {} bytes, has {}", data[0], n, data.size()));
    }
  };
  switch (data[0]) {
  case kFolderRecord: {
    need(kFolderRecordSize);
    out.kind = RecordKind::Folder;
    out.id = CatalogNodeId{be32(data, 6)};
    out.folder = FolderInfo{be16(data, 4), HfsDate{be32(data, 10)}, HfsDate{be32(data, 14)}};
    break;
  }
  case kFileRecord: {
    need(kFileRecordSize);
    out.kind = RecordKind::File;
    out.id = CatalogNodeId{be32(data, 20)};
    FileInfo info;
    std::copy_n(data.begin() + 4, 4, info.type_code.bytes.begin());
    std::copy_n(data.begin() + 8, 4, info.creator_code.bytes.begin());
    info.finder_flags = be16(data, 12);
    info.data_size = be32(data, 26);
    info.data_physical_size = be32(data, 30);
    info.rsrc_size = be32(data, 36);
    info.rsrc_physical_size = be32(data, 40);
    info.created = HfsDate{be32(data, 44)};
    info.modified = HfsDate{be32(data, 48)};
    info.backed_up = HfsDate{be32(data, 52)};
    info.data_extents = parse_extents(data, 74);
    info.rsrc_extents = parse_extents(data, 86);
    out.file = info;
    break;
  }
  case kFolderThreadRecord:
  case kFileThreadRecord: {
    need(kThreadRecordSize);
    out.kind = RecordKind::Thread;
    out.id = out.parent_id;
    out.parent_id = CatalogNodeId{be32(data, 10)};
    std::size_t len = data[14];
    if (len > 31) {
      tree.corrupt(fmt::format("bad thread name length {}", len));
    }
    auto tname = data.subspan(15, len);
    out.raw_name.assign(tname.begin(), tname.end());
    out.name = decode_name(tname);
    break;
  }
  default:
    tree.corrupt(fmt::format("unknown catalog record type {}", data[0]));
  }
  return out;
}

} // namespace

const CatalogIndex& Volume::Impl::catalog_index() const {
  std::call_once(catalog_once, [this] {
    auto index = std::make_unique<CatalogIndex>();
    BTreeReader tree(*this, catalog_runs, mdb.catalog_file.logical_size, "catalog");
    tree.for_each_leaf_record([&](std::span<const std::uint8_t> rec) {
      bool skip = false;
      CatalogRecord r = parse_catalog_record(rec, tree, skip);
      if (skip || r.kind == RecordKind::Thread) {
        return;
      }
      auto id = value_of(r.id);
      auto parent = value_of(r.parent_id);
      if (id < value_of(kRootFolderId)) {
        tree.corrupt(fmt::format("record '{}' has reserved id {}", r.name, id));
      }
      if (!index->by_id.emplace(id, std::move(r)).second) {
        tree.corrupt(fmt::format("duplicate catalog id {}", id));
      }
      index->children[parent].push_back(id);
    });
    auto root = index->by_id.find(value_of(kRootFolderId));
    if (root == index->by_id.end() || !root->second.is_folder() || root->second.parent_id != kRootParentId) {
      tree.corrupt("missing root folder record");
    }
    catalog = std::move(index);
  });
  return *catalog;
}

Volume::Volume(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

const MasterDirectoryBlock& Volume::mdb() const noexcept {
  return impl_->mdb;
}

std::uint64_t Volume::volume_offset() const noexcept {
  return impl_->base;
}

const ByteSource& Volume::image() const noexcept {
  return *impl_->image;
}

const CatalogRecord& Volume::record(CatalogNodeId id) const {
  const auto& index = impl_->catalog_index();
  auto it = index.by_id.find(value_of(id));
  if (it == index.by_id.end()) {
    raise(ErrorCode::UnknownId, fmt::format("no catalog record with id {}", value_of(id)));
  }
  return it->second;
}

CatalogRecord Volume::root() const {
  return record(kRootFolderId);
}

std::vector<CatalogRecord> Volume::list_children(CatalogNodeId folder_id) const {
  const auto& folder = record(folder_id);
  if (!folder.is_folder()) {
    raise(ErrorCode::NotAFolder, fmt::format("'{}' is a file", folder.name));
  }
  const auto& index = impl_->catalog_index();
  std::vector<CatalogRecord> out;
  if (auto it = index.children.find(value_of(folder_id)); it != index.children.end()) {
    out.reserve(it->second.size());
    for (auto id : it->second) {
      out.push_back(index.by_id.at(id));
    }
  }
  if (out.size() != folder.folder->valence) {
    raise(ErrorCode::CorruptCatalog, fmt::format("folder '{}' has valence {} but {} children", folder.name,
                                                 folder.folder->valence, out.size()));
  }
  return out;
}

CatalogRecord Volume::lookup(std::string_view path) const {
  CatalogRecord current = root();
  std::size_t pos = 0;
  while (pos < path.size() && path[pos] == '/') {
    ++pos;
  }
  while (pos < path.size()) {
    std::size_t slash = path.find('/', pos);
    std::string_view component = path.substr(pos, slash == std::string_view::npos ? path.npos : slash - pos);
    pos = slash == std::string_view::npos ? path.size() : slash + 1;
    if (component.empty()) {
      raise(ErrorCode::InvalidArgument, fmt::format("empty component in path '{}'", path));
    }
    if (!current.is_folder()) {
      raise(ErrorCode::NotAFolder, fmt::format("'{}' is a file", current.name));
    }
    std::string display(component);
    std::replace(display.begin(), display.end(), ':', '/');
    auto encoded = macroman::from_utf8(display);
    if (!encoded) {
      raise(ErrorCode::NotFound, fmt::format("'{}' not found", path));
    }
    const auto& index = impl_->catalog_index();
    auto kids = index.children.find(value_of(current.id));
    const CatalogRecord* match = nullptr;
    if (kids != index.children.end()) {
      for (auto id : kids->second) {
        const auto& child = index.by_id.at(id);
        if (macroman::equal_folded(child.raw_name, *encoded)) {
          match = &child;
          break;
        }
      }
    }
    if (match == nullptr) {
      raise(ErrorCode::NotFound, fmt::format("'{}' not found", path));
    }
    current = *match;
  }
  return current;
}

Bytes Volume::read_fork(const CatalogRecord& file, Fork fork, std::uint64_t offset, std::uint64_t length) const {
  ForkReader reader(*this, file, fork);
  if (offset > reader.size()) {
    raise(ErrorCode::InvalidArgument,
          fmt::format("offset {} past end of {}-byte fork of '{}'", offset, reader.size(), file.name));
  }
  Bytes out(static_cast<std::size_t>(std::min(length, reader.size() - offset)));
  reader.read(offset, out);
  return out;
}

std::size_t Volume::record_count() const {
  return impl_->catalog_index().by_id.size();
}

struct ForkReader::State {
  std::shared_ptr<const Volume::Impl> vol;
  std::vector<Run> runs;
};

ForkReader::ForkReader(const Volume& volume, const CatalogRecord& file, Fork fork) {
  if (!file.is_file() || !file.file) {
    raise(ErrorCode::InvalidArgument, fmt::format("'{}' is not a file", file.name));
  }
  const FileInfo& info = *file.file;
  auto state = std::make_shared<State>();
  state->vol = volume.impl_;
  size_ = info.size(fork);
  state->runs = volume.impl_->map_fork(fork == Fork::Data ? kDataForkType : kRsrcForkType, value_of(file.id), size_,
                                       fork == Fork::Data ? info.data_extents : info.rsrc_extents, true,
                                       ErrorCode::CorruptExtents);
  state_ = std::move(state);
}

std::size_t ForkReader::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (offset >= size_) {
    return 0;
  }
  std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), size_ - offset));
  state_->vol->read_runs(state_->runs, offset, out.first(n), ErrorCode::CorruptExtents);
  return n;
}

std::optional<std::uint64_t> find_volume_offset(const ByteSource& image) {
  auto signature_at = [&](std::uint64_t base) -> bool {
    if (base + kMdbOffset + 2 > image.size()) {
      return false;
    }
    auto sig = image.read(base + kMdbOffset, 2);
    return be16(sig, 0) == kSignature;
  };
  if (signature_at(0)) {
    return 0;
  }
  std::uint64_t block_size = kSectorSize;
  if (image.size() >= kSectorSize) {
    auto ddm = image.read(0, 4);
    if (be16(ddm, 0) == kDriverDescriptorSig) {
      std::uint16_t bs = be16(ddm, 2);
      if (bs >= kSectorSize && bs % kSectorSize == 0) {
        block_size = bs;
      }
    }
  }
  for (std::uint64_t off = kSectorSize; off + kSectorSize <= image.size() && off < kPartitionScanLimit;
       off += kSectorSize) {
    auto entry = image.read(off, 80);
    if (be16(entry, 0) != kPartitionMapSig) {
      continue;
    }
    std::string_view type(reinterpret_cast<const char*>(entry.data() + 48), 32);
    if (!type.starts_with("Apple_HFS")) {
      continue;
    }
    std::uint64_t base = std::uint64_t{be32(entry, 8)} * block_size;
    if (signature_at(base)) {
      return base;
    }
  }
  return std::nullopt;
}

Volume open_volume(std::shared_ptr<const ByteSource> image) {
  auto base = find_volume_offset(*image);
  if (!base) {
    raise(ErrorCode::NotHfs, "no HFS signature at offset 1024 or in a partition map");
  }
  if (*base + kMdbOffset + kSectorSize > image->size()) {
    raise(ErrorCode::Truncated, "image ends inside the master directory block");
  }
  auto impl = std::make_shared<Volume::Impl>();
  impl->image = std::move(image);
  impl->base = *base;
  Bytes raw = impl->image->read(*base + kMdbOffset, 162);
  MasterDirectoryBlock& m = impl->mdb;
  m.signature = be16(raw, 0);
  m.creation_date = HfsDate{be32(raw, 2)};
  m.modification_date = HfsDate{be32(raw, 6)};
  m.root_file_count = be16(raw, 12);
  m.bitmap_start = be16(raw, 14);
  m.allocation_block_count = be16(raw, 18);
  m.allocation_block_size = be32(raw, 20);
  m.first_allocation_block = be16(raw, 28);
  m.next_catalog_id = be32(raw, 30);
  m.free_blocks = be16(raw, 34);
  std::size_t name_length = std::min<std::size_t>(raw[36], 27);
  m.volume_name = decode_name(std::span<const std::uint8_t>(raw).subspan(37, name_length));
  m.file_count = be32(raw, 84);
  m.folder_count = be32(raw, 88);
  m.extents_overflow_file = ForkLocator{be32(raw, 130), parse_extents(raw, 134)};
  m.catalog_file = ForkLocator{be32(raw, 146), parse_extents(raw, 150)};

  if (m.allocation_block_size == 0 || m.allocation_block_size % kSectorSize != 0) {
    raise(ErrorCode::NotHfs, fmt::format("allocation block size {} is not a multiple of 512", m.allocation_block_size));
  }
  load_overflow(*impl);
  impl->catalog_runs = impl->map_fork(kDataForkType, value_of(kCatalogFileId), m.catalog_file.logical_size,
                                      m.catalog_file.extents, true, ErrorCode::Truncated);
  impl->catalog_header =
      BTreeReader(*impl, impl->catalog_runs, m.catalog_file.logical_size, "catalog").header();
  return Volume(std::move(impl));
}

Volume open_volume(const std::filesystem::path& image_path) {
  return open_volume(open_file_source(image_path));
}

} // namespace rtriage::hfs
