#pragma once

#include <cstdint>

namespace pake {

// Domain-separation prefixes for SHA-256 inputs.
inline constexpr std::uint8_t kDsPassword = 0x70;
inline constexpr std::uint8_t kDsDeriveH = 0x68;
inline constexpr std::uint8_t kDsCommit = 0x63;

// First byte of the keyed-hash message; one namespace for verifiers and key derivation.
inline constexpr std::uint8_t kTagServer = 0x00;
inline constexpr std::uint8_t kTagClient = 0x01;
inline constexpr std::uint8_t kTagSessionKey = 0x02;

}  // namespace pake
