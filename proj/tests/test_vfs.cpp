#include "support.hpp"

#include <rtriage/error.hpp>
#include <rtriage/vfs.hpp>

#include <gtest/gtest.h>

#include <fstream>

namespace rtriage {
namespace {

using fixtures::FixtureEntry;
using fixtures::FixtureSpec;
using testing::TempDir;

FixtureSpec ab_spec() {
  FixtureSpec spec;
  spec.entries = {FixtureEntry::file("a", "hello", "xyz"), FixtureEntry::file("b", "four")};
  return spec;
}

std::vector<std::string> paths(const std::vector<vfs::FileEntry>& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.relative_path + (e.is_file() ? "" : "/"));
  return out;
}

TEST(OpenSource, DetectsKind) {
  TempDir tmp;
  const auto img = tmp / "disk.img";
  testing::write_file(img, testing::as_string(fixtures::build_hfs_image(ab_spec())));
  testing::write_file(tmp / "notes.txt", "just text");
  EXPECT_EQ(vfs::open_source(img).kind(), vfs::SourceKind::Hfs);
  EXPECT_EQ(vfs::open_source(tmp.path()).kind(), vfs::SourceKind::Directory);
  try {
    vfs::open_source(tmp / "notes.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnrecognizedSource);
  }
  try {
    vfs::open_source(tmp / "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Walk, ResourceProjection) {
  const auto src = testing::fixture_source(ab_spec());
  vfs::WalkOptions on;
  on.include_rsrc_projection = true;
  const auto entries = vfs::entries_of(src.walk(on));
  EXPECT_EQ(paths(entries), (std::vector<std::string>{"a", "b", ".rsrc/", ".rsrc/a"}));
  EXPECT_EQ(entries[3].data_size, 3u);
  EXPECT_TRUE(entries[3].rsrc_projection);

  const auto plain = vfs::entries_of(src.walk({}));
  EXPECT_EQ(paths(plain), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(plain[0].data_size, 5u);
  EXPECT_EQ(plain[0].rsrc_size, 3u);
}

TEST(Walk, SkipZeroSize) {
  auto spec = ab_spec();
  spec.entries.push_back(FixtureEntry::file("c", ""));
  const auto src = testing::fixture_source(spec);
  vfs::WalkOptions opts;
  EXPECT_EQ(vfs::entries_of(src.walk(opts)).size(), 3u);
  opts.skip_zero_size = true;
  EXPECT_EQ(paths(vfs::entries_of(src.walk(opts))), (std::vector<std::string>{"a", "b"}));
}

TEST(Walk, NestedProjectionAndDepthLimit) {
  FixtureSpec spec;
  spec.entries = {FixtureEntry::folder("Apps", {FixtureEntry::file("Tool", "code", "resources"),
                                                FixtureEntry::folder("Deep", {FixtureEntry::file("x", "1")})})};
  const auto src = testing::fixture_source(spec);
  vfs::WalkOptions opts;
  opts.include_rsrc_projection = true;
  EXPECT_EQ(paths(vfs::entries_of(src.walk(opts))),
            (std::vector<std::string>{"Apps/", "Apps/Deep/", "Apps/Deep/x", "Apps/Tool", "Apps/.rsrc/",
                                      "Apps/.rsrc/Tool"}));
  opts.depth_limit = 2;
  EXPECT_EQ(paths(vfs::entries_of(src.walk(opts))),
            (std::vector<std::string>{"Apps/", "Apps/Deep/", "Apps/Tool", "Apps/.rsrc/"}));
}

TEST(ReadEntry, DataResourceAndFolder) {
  const auto src = testing::fixture_source(ab_spec());
  vfs::WalkOptions on;
  on.include_rsrc_projection = true;
  const auto entries = vfs::entries_of(src.walk(on));
  EXPECT_EQ(testing::as_string(src.read_entry(entries[0])), "hello");
  EXPECT_EQ(testing::as_string(src.read_entry(entries[3])), "xyz");
  try {
    src.read_entry(entries[2]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(ReadEntry, InjectedReadFailureIsIoError) {
  auto image = testing::image_of(ab_spec());
  auto faulty = std::make_shared<testing::FaultySource>(image, image->size() / 2, image->size());
  // Catalog and forks sit at the start of the image; only the tail fails.
  const auto src = vfs::open_hfs_source(faulty, "faulty");
  const auto entries = vfs::entries_of(src.walk({}));
  EXPECT_EQ(testing::as_string(src.read_entry(entries[0])), "hello");

  const auto vol = hfs::open_volume(image);
  const auto a = vol.lookup("/a");
  const std::uint64_t start = vol.mdb().first_allocation_block * 512ull +
                              a.file->data_extents[0].start_block * std::uint64_t{vol.mdb().allocation_block_size};
  auto bad = std::make_shared<testing::FaultySource>(image, start, start + 1);
  const auto bad_src = vfs::open_hfs_source(bad, "bad");
  const auto bad_entries = vfs::entries_of(bad_src.walk({}));
  try {
    bad_src.read_entry(bad_entries[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  EXPECT_EQ(testing::as_string(bad_src.read_entry(bad_entries[1])), "four");
}

TEST(DirectoryWalk, SortedDepthFirst) {
  TempDir tmp;
  testing::write_file(tmp / "b.txt", "bb");
  testing::write_file(tmp / "a/z", "zz");
  testing::write_file(tmp / "a/y", "");
  testing::write_file(tmp / "C", "c");
  std::filesystem::create_symlink(tmp / "b.txt", tmp / "link");
  const auto src = vfs::open_source(tmp.path(), vfs::KindHint::Directory);
  const auto events = src.walk({});
  EXPECT_EQ(paths(vfs::entries_of(events)), (std::vector<std::string>{"C", "a/", "a/y", "a/z", "b.txt"}));
  const auto issues = vfs::issues_of(events);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].relative_path, "link");
  EXPECT_EQ(issues[0].kind, vfs::IssueKind::Warning);
  const auto entries = vfs::entries_of(events);
  EXPECT_EQ(testing::as_string(src.read_entry(entries[3])), "zz");
  EXPECT_FALSE(entries[3].created.has_value());
  EXPECT_TRUE(entries[3].modified.has_value());
}

TEST(DirectoryWalk, VanishedFileIsGone) {
  TempDir tmp;
  testing::write_file(tmp / "f", "data");
  const auto src = vfs::open_source(tmp.path());
  const auto entries = vfs::entries_of(src.walk({}));
  std::filesystem::remove(tmp / "f");
  try {
    src.read_entry(entries[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Gone);
  }
}

TEST(DirectoryWalk, RealRsrcFolderSuppressesProjection) {
  FixtureSpec spec;
  spec.entries = {FixtureEntry::file("a", "1", "r"), FixtureEntry::folder(".rsrc", {})};
  const auto src = testing::fixture_source(spec);
  vfs::WalkOptions on;
  on.include_rsrc_projection = true;
  const auto events = src.walk(on);
  EXPECT_EQ(paths(vfs::entries_of(events)), (std::vector<std::string>{".rsrc/", "a"}));
  EXPECT_EQ(vfs::issues_of(events).size(), 1u);
}

} // namespace
} // namespace rtriage
