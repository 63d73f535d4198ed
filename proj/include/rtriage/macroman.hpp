#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

// MacRoman <-> UTF-8 conversion and the case/diacritic fold used for HFS
// name comparison.
namespace rtriage::macroman {

std::string to_utf8(std::span<const std::uint8_t> bytes);

/// nullopt if the text is not valid UTF-8 or holds a character outside
/// MacRoman.
std::optional<std::string> from_utf8(std::string_view utf8);

/// Uppercases and strips diacritics: 'a', 0x87 (a acute) and 0x80
/// (A diaeresis) all fold to 'A'.
std::uint8_t fold(std::uint8_t c) noexcept;

std::string fold(std::string_view macroman_bytes);

/// True when the two MacRoman names are equal after folding.
bool equal_folded(std::string_view a, std::string_view b) noexcept;

/// Orders MacRoman names by their folded bytes.
int compare_folded(std::string_view a, std::string_view b) noexcept;

} // namespace rtriage::macroman
