#include "support.hpp"

#include <rtriage/error.hpp>
#include <rtriage/hfs_volume.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <thread>

namespace rtriage {
namespace {

using fixtures::FixtureEntry;
using fixtures::FixtureSpec;
using testing::as_string;
using testing::image_of;

void put16(Bytes& b, std::size_t at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 8);
  b[at + 1] = static_cast<std::uint8_t>(v);
}
void put32(Bytes& b, std::size_t at, std::uint32_t v) {
  put16(b, at, static_cast<std::uint16_t>(v >> 16));
  put16(b, at + 2, static_cast<std::uint16_t>(v));
}
std::uint16_t get16(const Bytes& b, std::size_t at) { return static_cast<std::uint16_t>(b[at] << 8 | b[at + 1]); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

FixtureSpec docs_spec() {
  FixtureSpec spec;
  spec.volume_name = "TestVol";
  spec.entries = {
      FixtureEntry::file("A", "alpha"),
      FixtureEntry::file("B", "bravo", "rsrc-b"),
      FixtureEntry::folder("Docs", {FixtureEntry::file("letter", "hello", "xyz")}),
  };
  spec.entries[1].type_code = "TEXT";
  spec.entries[1].creator_code = "ttxt";
  spec.entries[1].modified = 3'000'000'000u;
  return spec;
}

TEST(OpenVolume, ReadsMasterDirectoryBlock) {
  auto image = image_of(docs_spec());
  EXPECT_EQ(image->size(), 4u * 1024 * 1024);
  const auto vol = hfs::open_volume(image);
  EXPECT_EQ(vol.mdb().volume_name, "TestVol");
  EXPECT_EQ(vol.mdb().signature, hfs::kSignature);
  EXPECT_EQ(vol.mdb().file_count, 3u);
  EXPECT_EQ(vol.mdb().folder_count, 1u);
  EXPECT_EQ(vol.mdb().root_file_count, 2u);
  EXPECT_EQ(vol.volume_offset(), 0u);
  EXPECT_EQ(vol.record_count(), 5u);
}

TEST(OpenVolume, AllZeroImageIsNotHfs) {
  auto zero = std::make_shared<MemorySource>(Bytes(4 * 1024 * 1024, 0));
  EXPECT_EQ(code_of([&] { hfs::open_volume(zero); }), ErrorCode::NotHfs);
}

TEST(OpenVolume, TinyImageIsNotHfs) {
  auto tiny = std::make_shared<MemorySource>(Bytes(100, 0));
  EXPECT_EQ(code_of([&] { hfs::open_volume(tiny); }), ErrorCode::NotHfs);
}

TEST(OpenVolume, CatalogExtentPastImageEndIsTruncated) {
  Bytes img = fixtures::build_hfs_image(docs_spec());
  put16(img, 1024 + 150, 0xFF00); // CTExtRec[0].startBlock
  auto src = std::make_shared<MemorySource>(std::move(img));
  EXPECT_EQ(code_of([&] { hfs::open_volume(src); }), ErrorCode::Truncated);
}

TEST(OpenVolume, ImageCutInsideMdbIsTruncated) {
  Bytes img = fixtures::build_hfs_image(docs_spec());
  img.resize(1200);
  auto src = std::make_shared<MemorySource>(std::move(img));
  EXPECT_EQ(code_of([&] { hfs::open_volume(src); }), ErrorCode::Truncated);
}

TEST(ListChildren, RootInCatalogOrder) {
  const auto vol = hfs::open_volume(image_of(docs_spec()));
  const auto kids = vol.list_children(hfs::kRootFolderId);
  ASSERT_EQ(kids.size(), 3u);
  EXPECT_EQ(kids[0].name, "A");
  EXPECT_EQ(kids[1].name, "B");
  EXPECT_EQ(kids[2].name, "Docs");
  EXPECT_TRUE(kids[2].is_folder());
  EXPECT_EQ(kids[1].file->type_code.str(), "TEXT");
  EXPECT_EQ(kids[1].file->creator_code.str(), "ttxt");
  EXPECT_EQ(kids[1].file->modified.raw, 3'000'000'000u);
}

TEST(ListChildren, EmptyRoot) {
  const auto vol = hfs::open_volume(image_of(FixtureSpec{}));
  EXPECT_TRUE(vol.list_children(hfs::kRootFolderId).empty());
  EXPECT_EQ(vol.root().id, hfs::kRootFolderId);
}

TEST(ListChildren, UnknownIdAndFile) {
  const auto vol = hfs::open_volume(image_of(docs_spec()));
  EXPECT_EQ(code_of([&] { vol.list_children(hfs::CatalogNodeId{999}); }), ErrorCode::UnknownId);
  const auto a = vol.lookup("/A");
  EXPECT_EQ(code_of([&] { vol.list_children(a.id); }), ErrorCode::NotAFolder);
}

TEST(Lookup, ResolvesPaths) {
  const auto vol = hfs::open_volume(image_of(docs_spec()));
  const auto letter = vol.lookup("/Docs/letter");
  EXPECT_TRUE(letter.is_file());
  EXPECT_EQ(letter.name, "letter");
  EXPECT_EQ(letter.file->data_size, 5u);
  EXPECT_EQ(letter.file->rsrc_size, 3u);
  EXPECT_EQ(vol.lookup("/").id, hfs::kRootFolderId);
  EXPECT_EQ(vol.lookup("/docs/LETTER").id, letter.id);
  EXPECT_EQ(vol.lookup("Docs/letter").id, letter.id);
  EXPECT_EQ(code_of([&] { vol.lookup("/Docs/letter/x"); }), ErrorCode::NotAFolder);
  EXPECT_EQ(code_of([&] { vol.lookup("/Docs/nope"); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { vol.lookup("/Docs//letter"); }), ErrorCode::InvalidArgument);
}

TEST(Lookup, SlashInNameShowsAsColon) {
  FixtureSpec spec;
  spec.entries = {FixtureEntry::file("a:b", "x")};
  const auto vol = hfs::open_volume(image_of(spec));
  const auto rec = vol.lookup("/a:b");
  EXPECT_EQ(rec.name, "a:b");
  EXPECT_EQ(rec.raw_name, "a/b");
}

TEST(ReadFork, Contents) {
  const auto vol = hfs::open_volume(image_of(docs_spec()));
  const auto letter = vol.lookup("/Docs/letter");
  EXPECT_EQ(as_string(vol.read_fork(letter, hfs::Fork::Data, 0, 5)), "hello");
  EXPECT_EQ(as_string(vol.read_fork(letter, hfs::Fork::Resource, 0, 3)), "xyz");
  EXPECT_EQ(as_string(vol.read_fork(letter, hfs::Fork::Data, 1, 100)), "ello");
  EXPECT_TRUE(vol.read_fork(letter, hfs::Fork::Data, 5, 10).empty());
  const auto a = vol.lookup("/A");
  EXPECT_TRUE(vol.read_fork(a, hfs::Fork::Resource, 0, 16).empty());
  EXPECT_EQ(code_of([&] { vol.read_fork(letter, hfs::Fork::Data, 6, 1); }), ErrorCode::InvalidArgument);
}

TEST(ReadFork, LargeForkAcrossBlockSizes) {
  for (std::uint32_t bs : {512u, 1024u, 4096u}) {
    std::string big(60000, '\0');
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<char>(i * 7 + 3);
    FixtureSpec spec;
    spec.allocation_block_size = bs;
    spec.entries = {FixtureEntry::file("big", big, big.substr(0, 777))};
    const auto vol = hfs::open_volume(image_of(spec, bs));
    const auto rec = vol.lookup("/big");
    EXPECT_EQ(as_string(vol.read_fork(rec, hfs::Fork::Data, 0, big.size())), big) << bs;
    EXPECT_EQ(as_string(vol.read_fork(rec, hfs::Fork::Resource, 0, 1000)), big.substr(0, 777)) << bs;
    hfs::ForkReader reader(vol, rec, hfs::Fork::Data);
    Bytes chunk(1000);
    EXPECT_EQ(reader.read(59500, chunk), 500u);
  }
}

TEST(HfsDate, EpochOffsets) {
  using namespace std::chrono;
  EXPECT_EQ(format_rfc3339(hfs::to_timestamp(hfs::HfsDate{0})), "1904-01-01T00:00:00Z");
  EXPECT_EQ(format_rfc3339(hfs::to_timestamp(hfs::HfsDate{86400})), "1904-01-02T00:00:00Z");
  // Oracle: the civil calendar of <chrono>.
  const auto offset = duration_cast<seconds>(sys_days{year{1970} / 1 / 1} - sys_days{year{1904} / 1 / 1}).count();
  ASSERT_EQ(offset, 2082844800);
  EXPECT_EQ(format_rfc3339(hfs::to_timestamp(hfs::HfsDate{static_cast<std::uint32_t>(offset)})),
            "1970-01-01T00:00:00Z");
  EXPECT_EQ(format_rfc3339(hfs::to_timestamp(hfs::HfsDate{0xFFFFFFFFu})), "2040-02-06T06:28:15Z");
}

// Splits the 4-block data fork of /frag into three inline one-block extents
// plus one record in a hand-written extents-overflow leaf.
struct OverflowImage {
  Bytes image;
  std::string data;
  std::size_t leaf_offset = 0;
};

OverflowImage make_overflow_image() {
  OverflowImage out;
  out.data.resize(2000);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<char>('a' + i % 26);
  FixtureSpec spec;
  spec.entries = {FixtureEntry::file("frag", out.data)};
  Bytes img = fixtures::build_hfs_image(spec, 5);

  const std::size_t mdb = 1024;
  const std::uint32_t block = 512;
  const std::size_t al_start = get16(img, mdb + 28) * 512u;
  auto block_offset = [&](std::uint16_t b) { return al_start + std::size_t{b} * block; };

  const std::uint8_t pattern[] = {0, 0, 0, 0, 2, 4, 'f', 'r', 'a', 'g'};
  const std::size_t cat = block_offset(get16(img, mdb + 150));
  const auto it = std::search(img.begin() + static_cast<std::ptrdiff_t>(cat), img.end(), std::begin(pattern),
                              std::end(pattern));
  EXPECT_NE(it, img.end());
  const std::size_t key = static_cast<std::size_t>(it - img.begin()) - 1;
  const std::size_t key_len = img[key] + 1u;
  const std::size_t rec = key + key_len + (key_len % 2);
  EXPECT_EQ(img[rec], 2); // file record
  const std::size_t ext = rec + 74;
  const std::uint16_t start = get16(img, ext);
  EXPECT_EQ(get16(img, ext + 2), 4);
  for (int i = 0; i < 3; ++i) {
    put16(img, ext + 4 * i, static_cast<std::uint16_t>(start + i));
    put16(img, ext + 4 * i + 2, 1);
  }
  const std::uint32_t file_id = static_cast<std::uint32_t>(img[rec + 20]) << 24 | img[rec + 21] << 16 |
                                img[rec + 22] << 8 | img[rec + 23];

  const std::size_t xt = block_offset(get16(img, mdb + 134));
  const std::size_t node_size = get16(img, xt + 14 + 18);
  EXPECT_EQ(node_size, 512u);
  // Header record: depth, root, leaf records, first and last leaf, free nodes.
  put16(img, xt + 14, 1);
  put32(img, xt + 16, 1);
  put32(img, xt + 20, 1);
  put32(img, xt + 24, 1);
  put32(img, xt + 28, 1);
  const std::uint32_t free_nodes = static_cast<std::uint32_t>(get16(img, xt + 14 + 26)) << 16 | get16(img, xt + 14 + 28);
  put32(img, xt + 14 + 26, free_nodes - 1);
  img[xt + 248] |= 0x40; // map bit for node 1

  const std::size_t leaf = xt + node_size;
  std::fill(img.begin() + static_cast<std::ptrdiff_t>(leaf), img.begin() + static_cast<std::ptrdiff_t>(leaf + node_size),
            0);
  img[leaf + 8] = 0xFF; // leaf
  img[leaf + 9] = 1;    // height
  put16(img, leaf + 10, 1);
  img[leaf + 14] = 7;
  img[leaf + 15] = 0x00; // data fork
  put32(img, leaf + 16, file_id);
  put16(img, leaf + 20, 3); // first file block covered
  put16(img, leaf + 22, static_cast<std::uint16_t>(start + 3));
  put16(img, leaf + 24, 1);
  put16(img, leaf + node_size - 2, 14);
  put16(img, leaf + node_size - 4, 14 + 8 + 12);
  out.image = std::move(img);
  out.leaf_offset = leaf;
  return out;
}

TEST(ExtentsOverflow, FourthExtentComesFromOverflowTree) {
  auto ov = make_overflow_image();
  const auto vol = hfs::open_volume(std::make_shared<MemorySource>(ov.image));
  const auto rec = vol.lookup("/frag");
  EXPECT_EQ(rec.file->data_extents[0].block_count, 1);
  EXPECT_EQ(rec.file->data_extents[2].block_count, 1);
  EXPECT_EQ(as_string(vol.read_fork(rec, hfs::Fork::Data, 0, ov.data.size())), ov.data);
  EXPECT_EQ(as_string(vol.read_fork(rec, hfs::Fork::Data, 1530, 100)), ov.data.substr(1530, 100));
}

TEST(ExtentsOverflow, MissingOverflowRecordIsCorrupt) {
  auto ov = make_overflow_image();
  put16(ov.image, ov.leaf_offset + 20, 9); // record now starts at the wrong file block
  const auto vol = hfs::open_volume(std::make_shared<MemorySource>(ov.image));
  const auto rec = vol.lookup("/frag");
  EXPECT_EQ(code_of([&] { vol.read_fork(rec, hfs::Fork::Data, 0, 10); }), ErrorCode::CorruptExtents);
}

TEST(PartitionMap, FindsWrappedVolume) {
  const Bytes hfs_image = fixtures::build_hfs_image(docs_spec());
  Bytes disk(64 * 512, 0);
  disk[0] = 'E';
  disk[1] = 'R';
  put16(disk, 2, 512);
  const char* types[] = {"Apple_partition_map", "Apple_HFS"};
  const std::uint32_t starts[] = {1, 64};
  for (int i = 0; i < 2; ++i) {
    const std::size_t e = 512u * (1 + i);
    disk[e] = 'P';
    disk[e + 1] = 'M';
    put32(disk, e + 4, 2);
    put32(disk, e + 8, starts[i]);
    put32(disk, e + 12, i == 0 ? 63 : static_cast<std::uint32_t>(hfs_image.size() / 512));
    std::copy_n(types[i], std::strlen(types[i]), disk.begin() + static_cast<std::ptrdiff_t>(e + 48));
  }
  disk.insert(disk.end(), hfs_image.begin(), hfs_image.end());
  auto src = std::make_shared<MemorySource>(std::move(disk));
  EXPECT_EQ(hfs::find_volume_offset(*src), std::optional<std::uint64_t>(64 * 512));
  const auto vol = hfs::open_volume(src);
  EXPECT_EQ(vol.volume_offset(), 64u * 512);
  EXPECT_EQ(as_string(vol.read_fork(vol.lookup("/Docs/letter"), hfs::Fork::Data, 0, 5)), "hello");
}

TEST(Volume, ConcurrentReadersAgree) {
  const auto vol = hfs::open_volume(image_of(fixtures::random_spec(7), 7));
  std::vector<std::string> results(8);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t)
    threads.emplace_back([&, t] {
      std::string acc;
      std::vector<hfs::CatalogNodeId> stack{hfs::kRootFolderId};
      while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        for (const auto& c : vol.list_children(id)) {
          acc += c.name;
          if (c.is_folder())
            stack.push_back(c.id);
          else
            acc += as_string(vol.read_fork(c, hfs::Fork::Data, 0, c.file->data_size));
        }
      }
      results[t] = acc;
    });
  for (auto& th : threads) th.join();
  for (const auto& r : results) EXPECT_EQ(r, results[0]);
}

} // namespace
} // namespace rtriage
