#pragma once

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>

#include "pake/bigint.hpp"

namespace pake {

using Digest = std::array<std::uint8_t, 32>;

/// Incremental SHA-256 over libcrypto's EVP interface.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("SHA-256 init failed");
  }

  Sha256& update(ByteView data) {
    if (EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1)
      throw std::runtime_error("SHA-256 update failed");
    return *this;
  }
  Sha256& update(std::uint8_t byte) { return update(ByteView(&byte, 1)); }
  Sha256& update(std::string_view s) {
    return update(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  Digest finish() {
    Digest out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1 || len != out.size())
      throw std::runtime_error("SHA-256 final failed");
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Digest sha256(ByteView data) { return Sha256().update(data).finish(); }

inline Digest hmac_sha256(ByteView key, ByteView message) {
  Digest out{};
  unsigned int len = 0;
  // HMAC() rejects a null key pointer even when the length is zero.
  static const std::uint8_t kEmpty = 0;
  const std::uint8_t* k = key.empty() ? &kEmpty : key.data();
  if (HMAC(EVP_sha256(), k, static_cast<int>(key.size()), message.data(), message.size(), out.data(),
           &len) == nullptr ||
      len != out.size())
    throw std::runtime_error("HMAC-SHA-256 failed");
  return out;
}

inline bool ct_equal(ByteView a, ByteView b) noexcept {
  if (a.size() != b.size()) return false;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace pake
