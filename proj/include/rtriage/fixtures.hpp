#pragma once

#include <rtriage/byte_source.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

// Deterministic writer of small classic-HFS images from a declarative tree.
// It is the test oracle for the parser and deliberately shares none of its
// code: every structure is laid out here from the on-disk format directly.
namespace rtriage::fixtures {

inline constexpr std::size_t kMaxFiles = 32;
inline constexpr std::size_t kMaxForkSize = 64 * 1024;
inline constexpr std::uint64_t kMinImageSize = 4 * 1024 * 1024;

enum class EntryKind { File, Folder };

struct FixtureEntry {
  /// Presentation form (UTF-8, ':' stands for an on-disk '/').
  std::string name;
  EntryKind kind{EntryKind::File};
  Bytes data;
  Bytes rsrc;
  std::string type_code{"????"};
  std::string creator_code{"????"};
  std::uint32_t created{0};
  std::uint32_t modified{0};
  std::vector<FixtureEntry> children;

  static FixtureEntry file(std::string name, std::string_view data, std::string_view rsrc = {});
  static FixtureEntry folder(std::string name, std::vector<FixtureEntry> children = {});
};

struct FixtureSpec {
  std::string volume_name{"Untitled"};
  std::uint32_t allocation_block_size{512};
  std::uint32_t created{0};
  std::uint32_t modified{0};
  std::vector<FixtureEntry> entries;
};

/// Throws SpecTooLarge or InvalidName when the spec breaks the fixture
/// limits (32 files, 64 KiB per fork, 27/31-byte MacRoman names, unique
/// folded names per folder).
void validate(const FixtureSpec& spec);

/// The seed fills unused allocation blocks and fork tails with pseudo-random
/// bytes, so readers that overrun a fork's logical size see garbage.
Bytes build_hfs_image(const FixtureSpec& spec, std::uint64_t seed = 0);

/// Size-bounded random tree: at most 32 files, folder depth at most 4,
/// forks of 0 to 64 KiB.
FixtureSpec random_spec(std::uint64_t seed);

std::size_t count_files(const FixtureSpec& spec);

FixtureSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const FixtureSpec& spec);

bool operator==(const FixtureEntry& a, const FixtureEntry& b);
bool operator==(const FixtureSpec& a, const FixtureSpec& b);

} // namespace rtriage::fixtures
