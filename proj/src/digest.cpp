#include <rtriage/digest.hpp>

#include <rtriage/error.hpp>

#include <algorithm>

#include <openssl/evp.h>

namespace rtriage {

struct Digest::Ctx {
  EVP_MD_CTX* md{nullptr};
  ~Ctx() { EVP_MD_CTX_free(md); }
};

Digest::Digest(DigestAlgorithm algorithm)
    : ctx_(std::make_unique<Ctx>()) {
  ctx_->md = EVP_MD_CTX_new();
  const EVP_MD* type = algorithm == DigestAlgorithm::Md5 ? EVP_md5() : EVP_sha256();
  if (ctx_->md == nullptr || EVP_DigestInit_ex(ctx_->md, type, nullptr) != 1) {
    raise(ErrorCode::IoError, "digest initialisation failed");
  }
}

Digest::~Digest() = default;
Digest::Digest(Digest&&) noexcept = default;
Digest& Digest::operator=(Digest&&) noexcept = default;

void Digest::update(std::span<const std::uint8_t> data) {
  if (!data.empty() && EVP_DigestUpdate(ctx_->md, data.data(), data.size()) != 1) {
    raise(ErrorCode::IoError, "digest update failed");
  }
}

void Digest::update(std::string_view data) {
  update(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string Digest::hex_final() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx_->md, out.data(), &len) != 1) {
    raise(ErrorCode::IoError, "digest finalisation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[out[i] >> 4]);
    hex.push_back(kHex[out[i] & 0x0F]);
  }
  return hex;
}

std::string md5_hex(std::span<const std::uint8_t> data) {
  Digest d(DigestAlgorithm::Md5);
  d.update(data);
  return d.hex_final();
}

std::string md5_hex(std::string_view data) {
  Digest d(DigestAlgorithm::Md5);
  d.update(data);
  return d.hex_final();
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
  Digest d(DigestAlgorithm::Sha256);
  d.update(data);
  return d.hex_final();
}

bool is_md5_hex(std::string_view text) noexcept {
  return text.size() == 32 &&
         std::all_of(text.begin(), text.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

} // namespace rtriage
