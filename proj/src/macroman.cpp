#include <rtriage/macroman.hpp>

#include <array>
#include <unordered_map>

namespace rtriage::macroman {

namespace {

// Code points for bytes 0x80..0xFF.
constexpr std::array<char32_t, 128> kHigh = {
    0x00C4, 0x00C5, 0x00C7, 0x00C9, 0x00D1, 0x00D6, 0x00DC, 0x00E1, // 80
    0x00E0, 0x00E2, 0x00E4, 0x00E3, 0x00E5, 0x00E7, 0x00E9, 0x00E8, // 88
    0x00EA, 0x00EB, 0x00ED, 0x00EC, 0x00EE, 0x00EF, 0x00F1, 0x00F3, // 90
    0x00F2, 0x00F4, 0x00F6, 0x00F5, 0x00FA, 0x00F9, 0x00FB, 0x00FC, // 98
    0x2020, 0x00B0, 0x00A2, 0x00A3, 0x00A7, 0x2022, 0x00B6, 0x00DF, // A0
    0x00AE, 0x00A9, 0x2122, 0x00B4, 0x00A8, 0x2260, 0x00C6, 0x00D8, // A8
    0x221E, 0x00B1, 0x2264, 0x2265, 0x00A5, 0x00B5, 0x2202, 0x2211, // B0
    0x220F, 0x03C0, 0x222B, 0x00AA, 0x00BA, 0x03A9, 0x00E6, 0x00F8, // B8
    0x00BF, 0x00A1, 0x00AC, 0x221A, 0x0192, 0x2248, 0x2206, 0x00AB, // C0
    0x00BB, 0x2026, 0x00A0, 0x00C0, 0x00C3, 0x00D5, 0x0152, 0x0153, // C8
    0x2013, 0x2014, 0x201C, 0x201D, 0x2018, 0x2019, 0x00F7, 0x25CA, // D0
    0x00FF, 0x0178, 0x2044, 0x20AC, 0x2039, 0x203A, 0xFB01, 0xFB02, // D8
    0x2021, 0x00B7, 0x201A, 0x201E, 0x2030, 0x00C2, 0x00CA, 0x00C1, // E0
    0x00CB, 0x00C8, 0x00CD, 0x00CE, 0x00CF, 0x00CC, 0x00D3, 0x00D4, // E8
    0xF8FF, 0x00D2, 0x00DA, 0x00DB, 0x00D9, 0x0131, 0x02C6, 0x02DC, // F0
    0x00AF, 0x02D8, 0x02D9, 0x02DA, 0x00B8, 0x02DD, 0x02DB, 0x02C7, // F8
};

constexpr std::array<std::uint8_t, 256> make_fold_table() {
  std::array<std::uint8_t, 256> t{};
  for (int i = 0; i < 256; ++i) {
    t[i] = static_cast<std::uint8_t>(i);
  }
  for (int c = 'a'; c <= 'z'; ++c) {
    t[c] = static_cast<std::uint8_t>(c - 'a' + 'A');
  }
  auto map = [&t](std::initializer_list<int> from, char to) {
    for (int f : from) {
      t[f] = static_cast<std::uint8_t>(to);
    }
  };
  map({0x80, 0x81, 0x87, 0x88, 0x89, 0x8A, 0x8B, 0x8C, 0xCB, 0xCC, 0xE5, 0xE7}, 'A');
  map({0x82, 0x8D}, 'C');
  map({0x83, 0x8E, 0x8F, 0x90, 0x91, 0xE6, 0xE8, 0xE9}, 'E');
  map({0x92, 0x93, 0x94, 0x95, 0xEA, 0xEB, 0xEC, 0xED, 0xF5}, 'I');
  map({0x84, 0x96}, 'N');
  map({0x85, 0x97, 0x98, 0x99, 0x9A, 0x9B, 0xCD, 0xEE, 0xEF, 0xF1}, 'O');
  map({0x86, 0x9C, 0x9D, 0x9E, 0x9F, 0xF2, 0xF3, 0xF4}, 'U');
  map({0xD8, 0xD9}, 'Y');
  t[0xBE] = 0xAE; // ae ligature
  t[0xCF] = 0xCE; // oe ligature
  t[0xBF] = 0xAF; // o slash
  return t;
}

constexpr auto kFold = make_fold_table();

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Returns false on malformed input.
bool next_code_point(std::string_view s, std::size_t& i, char32_t& cp) {
  auto byte = [&](std::size_t k) { return static_cast<std::uint8_t>(s[k]); };
  std::uint8_t b0 = byte(i);
  int extra = 0;
  if (b0 < 0x80) {
    cp = b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    cp = b0 & 0x1F;
    extra = 1;
  } else if ((b0 & 0xF0) == 0xE0) {
    cp = b0 & 0x0F;
    extra = 2;
  } else if ((b0 & 0xF8) == 0xF0) {
    cp = b0 & 0x07;
    extra = 3;
  } else {
    return false;
  }
  if (i + extra >= s.size()) {
    return false;
  }
  for (int k = 1; k <= extra; ++k) {
    std::uint8_t b = byte(i + k);
    if ((b & 0xC0) != 0x80) {
      return false;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += 1 + extra;
  return true;
}

const std::unordered_map<char32_t, std::uint8_t>& reverse_table() {
  static const auto table = [] {
    std::unordered_map<char32_t, std::uint8_t> m;
    for (std::size_t i = 0; i < kHigh.size(); ++i) {
      m.emplace(kHigh[i], static_cast<std::uint8_t>(0x80 + i));
    }
    return m;
  }();
  return table;
}

} // namespace

std::string to_utf8(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (std::uint8_t b : bytes) {
    append_utf8(out, b < 0x80 ? char32_t{b} : kHigh[b - 0x80]);
  }
  return out;
}

std::optional<std::string> from_utf8(std::string_view utf8) {
  std::string out;
  const auto& rev = reverse_table();
  std::size_t i = 0;
  while (i < utf8.size()) {
    char32_t cp = 0;
    if (!next_code_point(utf8, i, cp)) {
      return std::nullopt;
    }
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
      continue;
    }
    auto it = rev.find(cp);
    if (it == rev.end()) {
      return std::nullopt;
    }
    out.push_back(static_cast<char>(it->second));
  }
  return out;
}

std::uint8_t fold(std::uint8_t c) noexcept {
  return kFold[c];
}

std::string fold(std::string_view macroman_bytes) {
  std::string out(macroman_bytes);
  for (char& c : out) {
    c = static_cast<char>(kFold[static_cast<std::uint8_t>(c)]);
  }
  return out;
}

int compare_folded(std::string_view a, std::string_view b) noexcept {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto fa = kFold[static_cast<std::uint8_t>(a[i])];
    auto fb = kFold[static_cast<std::uint8_t>(b[i])];
    if (fa != fb) {
      return fa < fb ? -1 : 1;
    }
  }
  if (a.size() == b.size()) {
    return 0;
  }
  return a.size() < b.size() ? -1 : 1;
}

bool equal_folded(std::string_view a, std::string_view b) noexcept {
  return compare_folded(a, b) == 0;
}

} // namespace rtriage::macroman
