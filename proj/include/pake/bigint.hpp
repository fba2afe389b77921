#pragma once

#include <gmpxx.h>
#include <openssl/crypto.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pake/error.hpp"

namespace pake {

using Int = mpz_class;
using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline std::size_t bit_length(const Int& x) {
  return x == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

inline std::size_t byte_length(const Int& x) { return (bit_length(x) + 7) / 8; }

/// Big-endian, left-padded to exactly `width` bytes.
inline Bytes to_fixed_bytes(const Int& x, std::size_t width) {
  if (x < 0 || byte_length(x) > width) throw Error(Errc::OutOfRange, "integer does not fit width");
  Bytes out(width, 0);
  std::size_t n = byte_length(x);
  if (n > 0) {
    std::size_t written = 0;
    mpz_export(out.data() + (width - n), &written, 1, 1, 1, 0, x.get_mpz_t());
  }
  return out;
}

inline Int from_bytes(ByteView bytes) {
  Int x;
  if (!bytes.empty()) mpz_import(x.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return x;
}

inline bool is_lower_hex(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

inline Int from_hex(std::string_view s) {
  if (!is_lower_hex(s)) throw Error(Errc::ParamFile, "expected lowercase hex, got '" + std::string(s) + "'");
  return Int(std::string(s), 16);
}

inline std::string to_hex(const Int& x) { return x.get_str(16); }

inline std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

inline Bytes bytes_from_hex(std::string_view s) {
  if (s.size() % 2 != 0) throw Error(Errc::BadLength, "odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(Errc::ParamFile, "bad hex digit");
  };
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
  return out;
}

/// Overwrites the limbs of x before zeroing it.
inline void wipe(Int& x) noexcept {
  std::size_t n = mpz_size(x.get_mpz_t());
  if (n > 0) {
    mp_limb_t* limbs = mpz_limbs_modify(x.get_mpz_t(), static_cast<mp_size_t>(n));
    OPENSSL_cleanse(limbs, n * sizeof(mp_limb_t));
    mpz_limbs_finish(x.get_mpz_t(), 0);
  }
  x = 0;
}

}  // namespace pake
