#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace rtriage {

enum class DigestAlgorithm { Md5, Sha256 };

/// Incremental message digest over OpenSSL's EVP interface.
class Digest {
 public:
  explicit Digest(DigestAlgorithm algorithm);
  ~Digest();
  Digest(Digest&&) noexcept;
  Digest& operator=(Digest&&) noexcept;
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  void update(std::span<const std::uint8_t> data);
  void update(std::string_view data);

  /// Lowercase hex; the object must not be updated afterwards.
  std::string hex_final();

 private:
  struct Ctx;
  std::unique_ptr<Ctx> ctx_;
};

std::string md5_hex(std::span<const std::uint8_t> data);
std::string md5_hex(std::string_view data);
std::string sha256_hex(std::span<const std::uint8_t> data);

/// True for exactly 32 lowercase hex characters.
bool is_md5_hex(std::string_view text) noexcept;

} // namespace rtriage
