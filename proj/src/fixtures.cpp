#include <rtriage/fixtures.hpp>

#include <rtriage/error.hpp>
#include <rtriage/macroman.hpp>

#include <algorithm>
#include <random>
#include <set>

#include <fmt/format.h>

namespace rtriage::fixtures {

namespace {

constexpr std::size_t kNodeSize = 512;
constexpr std::size_t kExtentsNodes = 4;
constexpr std::uint32_t kFirstUserId = 16;

// Big-endian writer over a fixed buffer.
class Writer {
 public:
  explicit Writer(std::span<std::uint8_t> buf)
      : buf_(buf) {}

  void u8(std::size_t off, std::uint8_t v) { buf_[off] = v; }
  void u16(std::size_t off, std::uint16_t v) {
    buf_[off] = static_cast<std::uint8_t>(v >> 8);
    buf_[off + 1] = static_cast<std::uint8_t>(v);
  }
  void u32(std::size_t off, std::uint32_t v) {
    u16(off, static_cast<std::uint16_t>(v >> 16));
    u16(off + 2, static_cast<std::uint16_t>(v));
  }
  void bytes(std::size_t off, std::span<const std::uint8_t> b) { std::copy(b.begin(), b.end(), buf_.begin() + off); }
  void bytes(std::size_t off, std::string_view s) {
    std::copy(s.begin(), s.end(), reinterpret_cast<char*>(buf_.data()) + off);
  }

 private:
  std::span<std::uint8_t> buf_;
};

std::string encode_name(const std::string& presented, std::size_t max_len, std::string_view what) {
  std::string on_disk = presented;
  std::replace(on_disk.begin(), on_disk.end(), ':', '/');
  auto mr = macroman::from_utf8(on_disk);
  if (!mr) {
    raise(ErrorCode::InvalidName, fmt::format("{} '{}' is not representable in MacRoman", what, presented));
  }
  if (mr->empty() || mr->size() > max_len) {
    raise(ErrorCode::InvalidName, fmt::format("{} '{}' must be 1..{} bytes", what, presented, max_len));
  }
  return *mr;
}

std::string encode_code(const std::string& code) {
  auto mr = macroman::from_utf8(code);
  if (!mr || mr->size() != 4) {
    raise(ErrorCode::InvalidName, fmt::format("type/creator code '{}' must be 4 MacRoman characters", code));
  }
  return *mr;
}

void validate_entries(const std::vector<FixtureEntry>& entries, std::size_t& files) {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    std::string name = encode_name(e.name, 31, "name");
    if (!seen.insert(macroman::fold(name)).second) {
      raise(ErrorCode::InvalidName, fmt::format("'{}' clashes case-insensitively with a sibling", e.name));
    }
    if (e.kind == EntryKind::File) {
      ++files;
      if (e.data.size() > kMaxForkSize || e.rsrc.size() > kMaxForkSize) {
        raise(ErrorCode::SpecTooLarge, fmt::format("'{}' has a fork larger than 64 KiB", e.name));
      }
      encode_code(e.type_code);
      encode_code(e.creator_code);
      if (!e.children.empty()) {
        raise(ErrorCode::InvalidName, fmt::format("file '{}' has children", e.name));
      }
    } else {
      if (!e.data.empty() || !e.rsrc.empty()) {
        raise(ErrorCode::InvalidName, fmt::format("folder '{}' has fork data", e.name));
      }
      validate_entries(e.children, files);
    }
  }
}

struct Placed {
  const FixtureEntry* entry;
  std::uint32_t id;
  std::uint32_t parent;
  std::string raw_name;
  std::uint16_t data_start{0};
  std::uint16_t data_blocks{0};
  std::uint16_t rsrc_start{0};
  std::uint16_t rsrc_blocks{0};
};

void place(const std::vector<FixtureEntry>& entries, std::uint32_t parent, std::uint32_t& next_id,
           std::vector<Placed>& out) {
  for (const auto& e : entries) {
    Placed p{&e, next_id++, parent, encode_name(e.name, 31, "name")};
    out.push_back(p);
    if (e.kind == EntryKind::Folder) {
      place(e.children, p.id, next_id, out);
    }
  }
}

// Catalog leaf record: key then data, key padded to an even length.
struct LeafRecord {
  std::uint32_t parent;
  std::string raw_name;
  Bytes bytes;
};

Bytes make_key(std::uint32_t parent, const std::string& raw_name) {
  std::size_t key_len = 6 + raw_name.size();
  Bytes key((1 + key_len + 1) & ~std::size_t{1}, 0);
  Writer w(key);
  w.u8(0, static_cast<std::uint8_t>(key_len));
  w.u32(2, parent);
  w.u8(6, static_cast<std::uint8_t>(raw_name.size()));
  w.bytes(7, raw_name);
  return key;
}

LeafRecord folder_record(std::uint32_t parent, const std::string& raw_name, std::uint32_t id, std::uint16_t valence,
                         std::uint32_t created, std::uint32_t modified) {
  Bytes rec = make_key(parent, raw_name);
  std::size_t base = rec.size();
  rec.resize(base + 70, 0);
  Writer w{std::span(rec).subspan(base)};
  w.u8(0, 1);
  w.u16(4, valence);
  w.u32(6, id);
  w.u32(10, created);
  w.u32(14, modified);
  return {parent, raw_name, std::move(rec)};
}

LeafRecord thread_record(std::uint32_t id, std::uint32_t parent, const std::string& raw_name) {
  Bytes rec = make_key(id, "");
  std::size_t base = rec.size();
  rec.resize(base + 46, 0);
  Writer w{std::span(rec).subspan(base)};
  w.u8(0, 3);
  w.u32(10, parent);
  w.u8(14, static_cast<std::uint8_t>(raw_name.size()));
  w.bytes(15, raw_name);
  return {id, "", std::move(rec)};
}

LeafRecord file_record(const Placed& p, std::uint32_t block_size) {
  const FixtureEntry& e = *p.entry;
  Bytes rec = make_key(p.parent, p.raw_name);
  std::size_t base = rec.size();
  rec.resize(base + 102, 0);
  Writer w{std::span(rec).subspan(base)};
  w.u8(0, 2);
  w.bytes(4, encode_code(e.type_code));
  w.bytes(8, encode_code(e.creator_code));
  w.u32(20, p.id);
  w.u16(24, p.data_start);
  w.u32(26, static_cast<std::uint32_t>(e.data.size()));
  w.u32(30, p.data_blocks * block_size);
  w.u16(34, p.rsrc_start);
  w.u32(36, static_cast<std::uint32_t>(e.rsrc.size()));
  w.u32(40, p.rsrc_blocks * block_size);
  w.u32(44, e.created);
  w.u32(48, e.modified);
  if (p.data_blocks > 0) {
    w.u16(74, p.data_start);
    w.u16(76, p.data_blocks);
  }
  if (p.rsrc_blocks > 0) {
    w.u16(86, p.rsrc_start);
    w.u16(88, p.rsrc_blocks);
  }
  return {p.parent, p.raw_name, std::move(rec)};
}

// Packs sorted records into 512-byte leaves. Returns the node images.
std::vector<Bytes> pack_leaves(const std::vector<LeafRecord>& records) {
  std::vector<Bytes> nodes;
  std::vector<const LeafRecord*> current;
  std::size_t used = 14 + 2; // descriptor + free-space offset

  auto flush = [&] {
    Bytes node(kNodeSize, 0);
    Writer w(node);
    w.u8(8, 0xFF);
    w.u8(9, 1);
    w.u16(10, static_cast<std::uint16_t>(current.size()));
    std::size_t off = 14;
    for (std::size_t i = 0; i < current.size(); ++i) {
      w.u16(kNodeSize - 2 - 2 * i, static_cast<std::uint16_t>(off));
      w.bytes(off, current[i]->bytes);
      off += current[i]->bytes.size();
    }
    w.u16(kNodeSize - 2 - 2 * current.size(), static_cast<std::uint16_t>(off));
    nodes.push_back(std::move(node));
    current.clear();
    used = 14 + 2;
  };

  for (const auto& r : records) {
    if (used + r.bytes.size() + 2 > kNodeSize) {
      flush();
    }
    current.push_back(&r);
    used += r.bytes.size() + 2;
  }
  if (!current.empty()) {
    flush();
  }
  return nodes;
}

Bytes header_node(std::uint32_t total_nodes, std::uint32_t leaves, std::uint32_t leaf_records,
                  std::uint16_t max_key_len) {
  Bytes node(kNodeSize, 0);
  Writer w(node);
  w.u8(8, 1);
  w.u16(10, 3);
  w.u16(14, leaves > 0 ? 1 : 0); // depth
  w.u32(16, leaves > 0 ? 1 : 0); // root
  w.u32(20, leaf_records);
  w.u32(24, leaves > 0 ? 1 : 0); // first leaf
  w.u32(28, leaves); // last leaf
  w.u16(32, kNodeSize);
  w.u16(34, max_key_len);
  w.u32(36, total_nodes);
  w.u32(40, total_nodes - 1 - leaves);
  // Map record: one bit per node in use (header + leaves).
  for (std::uint32_t n = 0; n <= leaves; ++n) {
    node[248 + n / 8] |= static_cast<std::uint8_t>(0x80 >> (n % 8));
  }
  w.u16(kNodeSize - 2, 14);
  w.u16(kNodeSize - 4, 120);
  w.u16(kNodeSize - 6, 248);
  w.u16(kNodeSize - 8, 504);
  return node;
}

std::uint16_t blocks_for(std::size_t bytes, std::uint32_t block_size) {
  return static_cast<std::uint16_t>((bytes + block_size - 1) / block_size);
}

Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

} // namespace

FixtureEntry FixtureEntry::file(std::string name, std::string_view data, std::string_view rsrc) {
  FixtureEntry e;
  e.name = std::move(name);
  e.kind = EntryKind::File;
  e.data = to_bytes(data);
  e.rsrc = to_bytes(rsrc);
  return e;
}

FixtureEntry FixtureEntry::folder(std::string name, std::vector<FixtureEntry> children) {
  FixtureEntry e;
  e.name = std::move(name);
  e.kind = EntryKind::Folder;
  e.children = std::move(children);
  return e;
}

std::size_t count_files(const FixtureSpec& spec) {
  std::size_t n = 0;
  auto rec = [&n](auto& self, const std::vector<FixtureEntry>& es) -> void {
    for (const auto& e : es) {
      if (e.kind == EntryKind::File) {
        ++n;
      } else {
        self(self, e.children);
      }
    }
  };
  rec(rec, spec.entries);
  return n;
}

void validate(const FixtureSpec& spec) {
  encode_name(spec.volume_name, 27, "volume name");
  if (spec.allocation_block_size == 0 || spec.allocation_block_size % 512 != 0 ||
      spec.allocation_block_size > 64 * 1024) {
    raise(ErrorCode::InvalidArgument,
          fmt::format("allocation block size {} must be a multiple of 512", spec.allocation_block_size));
  }
  std::size_t files = 0;
  validate_entries(spec.entries, files);
  if (files > kMaxFiles) {
    raise(ErrorCode::SpecTooLarge, fmt::format("{} files exceed the fixture limit of {}", files, kMaxFiles));
  }
}

Bytes build_hfs_image(const FixtureSpec& spec, std::uint64_t seed) {
  validate(spec);
  const std::uint32_t bs = spec.allocation_block_size;
  const std::string volume_name = encode_name(spec.volume_name, 27, "volume name");

  std::vector<Placed> placed;
  std::uint32_t next_id = kFirstUserId;
  place(spec.entries, 2, next_id, placed);

  // Catalog records, sorted by (parent id, folded name); a folder's thread
  // record has the empty name and sorts first among its children.
  std::uint32_t files = 0;
  std::uint32_t folders = 0;
  std::uint16_t root_files = 0;
  std::uint16_t root_folders = 0;
  for (const auto& p : placed) {
    bool is_file = p.entry->kind == EntryKind::File;
    (is_file ? files : folders)++;
    if (p.parent == 2) {
      (is_file ? root_files : root_folders)++;
    }
  }

  // Allocation: extents file, catalog file, then every fork contiguously.
  std::uint16_t next_block = 0;
  const std::uint16_t ext_blocks = blocks_for(kExtentsNodes * kNodeSize, bs);
  const std::uint16_t ext_start = next_block;
  next_block = static_cast<std::uint16_t>(next_block + ext_blocks);

  // The catalog size depends only on record sizes, so size it from a
  // provisional packing before fork placement.
  auto catalog_records = [&]() {
    std::vector<LeafRecord> recs;
    recs.push_back(folder_record(1, volume_name, 2, static_cast<std::uint16_t>(root_files + root_folders),
                                 spec.created, spec.modified));
    recs.push_back(thread_record(2, 1, volume_name));
    for (const auto& p : placed) {
      if (p.entry->kind == EntryKind::Folder) {
        recs.push_back(folder_record(p.parent, p.raw_name, p.id, static_cast<std::uint16_t>(p.entry->children.size()),
                                     p.entry->created, p.entry->modified));
        recs.push_back(thread_record(p.id, p.parent, p.raw_name));
      } else {
        recs.push_back(file_record(p, bs));
      }
    }
    std::stable_sort(recs.begin(), recs.end(), [](const LeafRecord& a, const LeafRecord& b) {
      if (a.parent != b.parent) {
        return a.parent < b.parent;
      }
      return macroman::compare_folded(a.raw_name, b.raw_name) < 0;
    });
    return recs;
  };
  const std::size_t leaf_count = pack_leaves(catalog_records()).size();
  const std::size_t cat_nodes = 1 + leaf_count + 1; // one spare node
  const std::uint16_t cat_blocks = blocks_for(cat_nodes * kNodeSize, bs);
  const std::uint16_t cat_start = next_block;
  next_block = static_cast<std::uint16_t>(next_block + cat_blocks);

  std::uint64_t fork_blocks = 0;
  for (const auto& p : placed) {
    fork_blocks += blocks_for(p.entry->data.size(), bs) + blocks_for(p.entry->rsrc.size(), bs);
  }
  const std::uint64_t used_blocks = next_block + fork_blocks;

  // Geometry: boot blocks (2 sectors), MDB sector, bitmap, allocation area,
  // alternate MDB in the second-to-last sector.
  std::uint64_t image_size = kMinImageSize;
  std::uint64_t bitmap_sectors = 0;
  std::uint64_t first_alloc = 0;
  std::uint64_t total_blocks = 0;
  for (;;) {
    bitmap_sectors = (image_size / bs + 4095) / 4096;
    first_alloc = 3 + bitmap_sectors;
    total_blocks = (image_size - first_alloc * 512 - 1024) / bs;
    if (total_blocks >= used_blocks) {
      break;
    }
    image_size += 1024 * 1024;
  }
  if (total_blocks > 0xFFFF) {
    total_blocks = 0xFFFF;
  }
  if (used_blocks > total_blocks) {
    raise(ErrorCode::SpecTooLarge, "spec does not fit in 65535 allocation blocks");
  }

  for (auto& p : placed) {
    if (p.entry->kind != EntryKind::File) {
      continue;
    }
    p.data_blocks = blocks_for(p.entry->data.size(), bs);
    p.data_start = p.data_blocks ? next_block : 0;
    next_block = static_cast<std::uint16_t>(next_block + p.data_blocks);
    p.rsrc_blocks = blocks_for(p.entry->rsrc.size(), bs);
    p.rsrc_start = p.rsrc_blocks ? next_block : 0;
    next_block = static_cast<std::uint16_t>(next_block + p.rsrc_blocks);
  }

  Bytes image(image_size, 0);
  const std::uint64_t alloc_base = first_alloc * 512;
  auto block_offset = [&](std::uint64_t block) { return alloc_base + block * bs; };

  // Unused allocation space and fork tails carry seeded noise.
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  auto noise = [&](std::uint64_t from, std::uint64_t to) {
    for (std::uint64_t i = from; i < to; ++i) {
      image[i] = static_cast<std::uint8_t>(rng() >> 56);
    }
  };
  noise(block_offset(next_block), block_offset(total_blocks));

  auto write_fork = [&](const Bytes& data, std::uint16_t start, std::uint16_t blocks) {
    if (blocks == 0) {
      return;
    }
    std::uint64_t off = block_offset(start);
    std::copy(data.begin(), data.end(), image.begin() + static_cast<std::ptrdiff_t>(off));
    noise(off + data.size(), off + std::uint64_t{blocks} * bs);
  };
  for (const auto& p : placed) {
    if (p.entry->kind == EntryKind::File) {
      write_fork(p.entry->data, p.data_start, p.data_blocks);
      write_fork(p.entry->rsrc, p.rsrc_start, p.rsrc_blocks);
    }
  }

  // Catalog B-tree: header node, linked leaves, spare.
  auto records = catalog_records();
  auto leaves = pack_leaves(records);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    Writer w(leaves[i]);
    w.u32(0, i + 1 < leaves.size() ? static_cast<std::uint32_t>(i + 2) : 0);
    w.u32(4, i > 0 ? static_cast<std::uint32_t>(i) : 0);
  }
  const std::uint64_t cat_off = block_offset(cat_start);
  auto cat_header = header_node(static_cast<std::uint32_t>(cat_blocks * bs / kNodeSize),
                                static_cast<std::uint32_t>(leaves.size()), static_cast<std::uint32_t>(records.size()),
                                37);
  std::copy(cat_header.begin(), cat_header.end(), image.begin() + static_cast<std::ptrdiff_t>(cat_off));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    std::copy(leaves[i].begin(), leaves[i].end(),
              image.begin() + static_cast<std::ptrdiff_t>(cat_off + (i + 1) * kNodeSize));
  }

  // Extents-overflow B-tree: header node only.
  auto ext_header = header_node(static_cast<std::uint32_t>(ext_blocks * bs / kNodeSize), 0, 0, 7);
  std::copy(ext_header.begin(), ext_header.end(),
            image.begin() + static_cast<std::ptrdiff_t>(block_offset(ext_start)));

  // Volume bitmap, most significant bit first.
  for (std::uint64_t b = 0; b < next_block; ++b) {
    image[3 * 512 + b / 8] |= static_cast<std::uint8_t>(0x80 >> (b % 8));
  }

  Bytes mdb(512, 0);
  Writer w(mdb);
  w.u16(0, 0x4244);
  w.u32(2, spec.created);
  w.u32(6, spec.modified);
  w.u16(10, 0x0100); // cleanly unmounted
  w.u16(12, root_files);
  w.u16(14, 3);
  w.u16(18, static_cast<std::uint16_t>(total_blocks));
  w.u32(20, bs);
  w.u32(24, 4 * bs);
  w.u16(28, static_cast<std::uint16_t>(first_alloc));
  w.u32(30, next_id);
  w.u16(34, static_cast<std::uint16_t>(total_blocks - next_block));
  w.u8(36, static_cast<std::uint8_t>(volume_name.size()));
  w.bytes(37, volume_name);
  w.u32(74, ext_blocks * bs);
  w.u32(78, cat_blocks * bs);
  w.u16(82, root_folders);
  w.u32(84, files);
  w.u32(88, folders);
  w.u32(130, ext_blocks * bs);
  w.u16(134, ext_start);
  w.u16(136, ext_blocks);
  w.u32(146, cat_blocks * bs);
  w.u16(150, cat_start);
  w.u16(152, cat_blocks);
  std::copy(mdb.begin(), mdb.end(), image.begin() + 1024);
  std::copy(mdb.begin(), mdb.end(), image.end() - 1024);
  return image;
}

namespace {

// Portable draws: only raw engine output is used, never the
// implementation-defined standard distributions.
class Draw {
 public:
  explicit Draw(std::uint64_t seed)
      : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(unsigned percent) { return below(100) < percent; }
  std::uint32_t u32() { return static_cast<std::uint32_t>(rng_() >> 32); }

  Bytes bytes(std::size_t n) {
    Bytes b(n);
    for (auto& x : b) {
      x = static_cast<std::uint8_t>(rng_() >> 56);
    }
    return b;
  }

 private:
  std::mt19937_64 rng_;
};

constexpr std::string_view kNameChars[] = {
    "a", "b", "c", "d", "e", "f", "g", "h", "k", "m", "n", "p", "r", "s", "t", "x", "z", "A", "B", "Q",
    "0", "1", "7", " ", "-", "_", ".", "é", "ü", "Ø", "ç", "ß", "•", ":", "™", "Å",
};

std::string random_name(Draw& d, std::size_t max_bytes) {
  std::string name;
  std::size_t len = 1 + d.below(12);
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < len; ++i) {
    auto c = kNameChars[d.below(std::size(kNameChars))];
    // every entry in the table encodes to a single MacRoman byte
    if (bytes + 1 > max_bytes) {
      break;
    }
    name += c;
    ++bytes;
  }
  return name;
}

std::string random_code(Draw& d) {
  std::string code;
  for (int i = 0; i < 4; ++i) {
    code.push_back(static_cast<char>('A' + d.below(26) + (d.chance(50) ? 32 : 0)));
  }
  return code;
}

std::size_t random_fork_size(Draw& d) {
  auto roll = d.below(100);
  if (roll < 30) {
    return 0;
  }
  if (roll < 85) {
    return 1 + d.below(4096);
  }
  return d.below(kMaxForkSize + 1);
}

void fill_folder(Draw& d, std::vector<FixtureEntry>& out, int depth, std::size_t& files_left) {
  std::size_t n = d.below(7);
  std::set<std::string> folded;
  for (std::size_t i = 0; i < n; ++i) {
    bool folder = depth < 4 && d.chance(25);
    if (!folder && files_left == 0) {
      continue;
    }
    FixtureEntry e;
    for (int attempt = 0; attempt < 8; ++attempt) {
      e.name = random_name(d, 31);
      if (e.name == "." || e.name == "..") {
        e.name.clear();
        continue;
      }
      auto mr = macroman::from_utf8([&] {
        std::string s = e.name;
        std::replace(s.begin(), s.end(), ':', '/');
        return s;
      }());
      if (mr && folded.insert(macroman::fold(*mr)).second) {
        break;
      }
      e.name.clear();
    }
    if (e.name.empty()) {
      continue;
    }
    e.created = d.u32();
    e.modified = d.u32();
    if (folder) {
      e.kind = EntryKind::Folder;
      fill_folder(d, e.children, depth + 1, files_left);
    } else {
      e.kind = EntryKind::File;
      --files_left;
      e.data = d.bytes(random_fork_size(d));
      e.rsrc = d.bytes(random_fork_size(d));
      e.type_code = random_code(d);
      e.creator_code = random_code(d);
    }
    out.push_back(std::move(e));
  }
}

} // namespace

FixtureSpec random_spec(std::uint64_t seed) {
  Draw d(seed * 0x2545F4914F6CDD1DULL + 1);
  FixtureSpec spec;
  spec.volume_name = fmt::format("Vol{}", seed % 100000);
  constexpr std::uint32_t kBlockSizes[] = {512, 512, 1024, 2048, 4096};
  spec.allocation_block_size = kBlockSizes[d.below(std::size(kBlockSizes))];
  spec.created = d.u32();
  spec.modified = d.u32();
  std::size_t files_left = d.below(kMaxFiles + 1);
  fill_folder(d, spec.entries, 1, files_left);
  return spec;
}

namespace {

std::string hex_of(const Bytes& b) {
  std::string s;
  s.reserve(b.size() * 2);
  for (auto x : b) {
    s += fmt::format("{:02x}", x);
  }
  return s;
}

Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) {
    raise(ErrorCode::InvalidArgument, "hex string has odd length");
  }
  Bytes out;
  out.reserve(s.size() / 2);
  for (std::size_t i = 0; i < s.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoul(s.substr(i, 2), nullptr, 16)));
  }
  return out;
}

Bytes fork_from_json(const nlohmann::json& j, const char* text_key, const char* hex_key) {
  if (j.contains(hex_key)) {
    return from_hex(j.at(hex_key).get<std::string>());
  }
  if (j.contains(text_key)) {
    return to_bytes(j.at(text_key).get<std::string>());
  }
  return {};
}

FixtureEntry entry_from_json(const nlohmann::json& j) {
  FixtureEntry e;
  e.name = j.at("name").get<std::string>();
  std::string kind = j.value("kind", std::string("file"));
  if (kind == "folder") {
    e.kind = EntryKind::Folder;
    for (const auto& c : j.value("children", nlohmann::json::array())) {
      e.children.push_back(entry_from_json(c));
    }
  } else if (kind == "file") {
    e.kind = EntryKind::File;
    e.data = fork_from_json(j, "data", "data_hex");
    e.rsrc = fork_from_json(j, "rsrc", "rsrc_hex");
    e.type_code = j.value("type", e.type_code);
    e.creator_code = j.value("creator", e.creator_code);
  } else {
    raise(ErrorCode::InvalidArgument, fmt::format("unknown entry kind '{}'", kind));
  }
  e.created = j.value("created", std::uint32_t{0});
  e.modified = j.value("modified", std::uint32_t{0});
  return e;
}

nlohmann::json entry_to_json(const FixtureEntry& e) {
  nlohmann::json j;
  j["name"] = e.name;
  j["kind"] = e.kind == EntryKind::File ? "file" : "folder";
  if (e.kind == EntryKind::File) {
    j["data_hex"] = hex_of(e.data);
    j["rsrc_hex"] = hex_of(e.rsrc);
    j["type"] = e.type_code;
    j["creator"] = e.creator_code;
  } else {
    j["children"] = nlohmann::json::array();
    for (const auto& c : e.children) {
      j["children"].push_back(entry_to_json(c));
    }
  }
  j["created"] = e.created;
  j["modified"] = e.modified;
  return j;
}

} // namespace

FixtureSpec spec_from_json(const nlohmann::json& j) {
  try {
    FixtureSpec spec;
    spec.volume_name = j.value("volume_name", spec.volume_name);
    spec.allocation_block_size = j.value("allocation_block_size", spec.allocation_block_size);
    spec.created = j.value("created", std::uint32_t{0});
    spec.modified = j.value("modified", std::uint32_t{0});
    for (const auto& e : j.value("entries", nlohmann::json::array())) {
      spec.entries.push_back(entry_from_json(e));
    }
    return spec;
  } catch (const nlohmann::json::exception& ex) {
    raise(ErrorCode::InvalidArgument, fmt::format("bad fixture spec: {}", ex.what()));
  }
}

nlohmann::json spec_to_json(const FixtureSpec& spec) {
  nlohmann::json j;
  j["volume_name"] = spec.volume_name;
  j["allocation_block_size"] = spec.allocation_block_size;
  j["created"] = spec.created;
  j["modified"] = spec.modified;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : spec.entries) {
    j["entries"].push_back(entry_to_json(e));
  }
  return j;
}

bool operator==(const FixtureEntry& a, const FixtureEntry& b) {
  return a.name == b.name && a.kind == b.kind && a.data == b.data && a.rsrc == b.rsrc &&
         a.type_code == b.type_code && a.creator_code == b.creator_code && a.created == b.created &&
         a.modified == b.modified && a.children == b.children;
}

bool operator==(const FixtureSpec& a, const FixtureSpec& b) {
  return a.volume_name == b.volume_name && a.allocation_block_size == b.allocation_block_size &&
         a.created == b.created && a.modified == b.modified && a.entries == b.entries;
}

} // namespace rtriage::fixtures
