#pragma once

// Frame layout: version (0x01) || msg_type || length (2 bytes, big-endian) || payload.

#include <cstdint>
#include <optional>
#include <string_view>

#include "pake/bigint.hpp"
#include "pake/error.hpp"

namespace pake {

inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 4;
inline constexpr std::size_t kMaxPayload = 0xffff;

enum class MsgType : std::uint8_t {
  Commit = 0x01,
  HGen = 0x02,
  Reveal = 0x03,
  Y1 = 0x10,
  Y2 = 0x11,
  V1 = 0x20,
  V2 = 0x21,
  ParamSet = 0x30,
  Abort = 0xff,
};

constexpr bool is_known_type(std::uint8_t t) noexcept {
  switch (t) {
    case 0x01: case 0x02: case 0x03: case 0x10: case 0x11:
    case 0x20: case 0x21: case 0x30: case 0xff:
      return true;
    default:
      return false;
  }
}

constexpr std::string_view to_string(MsgType t) noexcept {
  switch (t) {
    case MsgType::Commit: return "COMMIT";
    case MsgType::HGen: return "HGEN";
    case MsgType::Reveal: return "REVEAL";
    case MsgType::Y1: return "Y1";
    case MsgType::Y2: return "Y2";
    case MsgType::V1: return "V1";
    case MsgType::V2: return "V2";
    case MsgType::ParamSet: return "PARAMSET";
    case MsgType::Abort: return "ABORT";
  }
  return "?";
}

// Optional one-byte ABORT payload.
enum class AbortReason : std::uint8_t { Auth = 0x01, Protocol = 0x02 };

struct WireMessage {
  MsgType type;
  Bytes payload;

  bool operator==(const WireMessage&) const = default;
};

inline Bytes encode_message(const WireMessage& m) {
  if (m.payload.size() > kMaxPayload) throw Error(Errc::PayloadTooLong, std::to_string(m.payload.size()) + " bytes");
  Bytes out;
  out.reserve(kFrameHeaderSize + m.payload.size());
  out.push_back(kWireVersion);
  out.push_back(static_cast<std::uint8_t>(m.type));
  out.push_back(static_cast<std::uint8_t>(m.payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(m.payload.size() & 0xff));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

/// Declared payload length from a header; nullopt if fewer than 4 bytes are present.
inline std::optional<std::size_t> frame_payload_length(ByteView bytes) {
  if (bytes.size() < kFrameHeaderSize) return std::nullopt;
  return static_cast<std::size_t>(bytes[2]) << 8 | bytes[3];
}

/// Parses exactly one frame; trailing bytes are an error.
inline WireMessage decode_message(ByteView bytes) {
  if (bytes.size() < kFrameHeaderSize) throw Error(Errc::Truncated, "short header");
  if (bytes[0] != kWireVersion) throw Error(Errc::BadVersion, "version " + std::to_string(bytes[0]));
  if (!is_known_type(bytes[1])) throw Error(Errc::UnknownType, "type " + std::to_string(bytes[1]));
  const std::size_t len = *frame_payload_length(bytes);
  const std::size_t have = bytes.size() - kFrameHeaderSize;
  if (have < len) throw Error(Errc::Truncated, "declared " + std::to_string(len) + ", have " + std::to_string(have));
  if (have > len) throw Error(Errc::LengthMismatch, std::to_string(have - len) + " trailing bytes");
  return WireMessage{static_cast<MsgType>(bytes[1]), Bytes(bytes.begin() + kFrameHeaderSize, bytes.end())};
}

inline WireMessage abort_message(std::optional<AbortReason> reason = std::nullopt) {
  WireMessage m{MsgType::Abort, {}};
  if (reason) m.payload.push_back(static_cast<std::uint8_t>(*reason));
  return m;
}

}  // namespace pake
