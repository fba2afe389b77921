#pragma once

// Two-phase handshake for one entity.
//
// Amplification: each side sends y = g^r * h^pass and computes
//   km = (y_peer * h^-pass)^r, which equals g^(r1*r2) when the passwords match.
// Verification: v = HMAC-SHA-256(encode(km), tag || encode(y1) || encode(y2))
//   with tag 0x00 for the server (v1) and 0x01 for the client (v2).
//
// Transitions consume the session (rvalue-qualified members), so an outdated
// state cannot be advanced twice by accident.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "pake/constants.hpp"
#include "pake/crypto.hpp"
#include "pake/group.hpp"

namespace pake {

enum class Role { Client, Server };

constexpr std::string_view to_string(Role r) noexcept { return r == Role::Client ? "client" : "server"; }

enum class Phase { Started, Amplified, ConfirmedPeer, Failed };

constexpr std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Started: return "Started";
    case Phase::Amplified: return "Amplified";
    case Phase::ConfirmedPeer: return "ConfirmedPeer";
    case Phase::Failed: return "Failed";
  }
  return "?";
}

struct VerifierValue {
  Digest bytes{};
  // Non-constant-time; use check_verifier or ct_equal for protocol decisions.
  bool operator==(const VerifierValue&) const = default;
};

struct SessionKey {
  Digest bytes{};
  bool operator==(const SessionKey&) const = default;
};

/// First 8 hex chars of SHA-256(key); safe to log.
inline std::string fingerprint(const SessionKey& key) { return to_hex(sha256(key.bytes)).substr(0, 8); }

class PasswordExponent {
 public:
  const Scalar& scalar() const noexcept { return value_; }
  const std::string& context() const noexcept { return context_; }

 private:
  friend PasswordExponent password_to_exponent(std::string_view, const Group&);
  friend PasswordExponent password_exponent_from_scalar(Scalar, const Group&);
  PasswordExponent(Scalar v, std::string ctx) : value_(std::move(v)), context_(std::move(ctx)) {}

  Scalar value_;
  std::string context_;
};

/// Maps a password string to an exponent in [1, q-1], bound to the parameter-set name.
inline PasswordExponent password_to_exponent(std::string_view password, const Group& group) {
  if (password.empty()) throw Error(Errc::EmptyPassword, "password must not be empty");
  const std::string& name = group.name();
  const std::size_t blocks = (bit_length(group.q()) + 64 + 255) / 256;
  for (unsigned attempt = 0; attempt <= 255; ++attempt) {
    Bytes stream;
    stream.reserve(blocks * 32);
    for (std::size_t i = 0; i < blocks; ++i) {
      Digest d = Sha256()
                     .update(kDsPassword)
                     .update(static_cast<std::uint8_t>(name.size()))
                     .update(name)
                     .update(password)
                     .update(static_cast<std::uint8_t>(attempt))
                     .update(static_cast<std::uint8_t>(i))
                     .finish();
      stream.insert(stream.end(), d.begin(), d.end());
    }
    Int e = from_bytes(stream) % group.q();
    OPENSSL_cleanse(stream.data(), stream.size());
    if (e != 0) {
      PasswordExponent out(group.scalar(e), name);
      wipe(e);
      return out;
    }
  }
  throw Error(Errc::DerivationFailed, "password exponent derivation did not terminate");
}

/// Uses a raw exponent directly (oracle harness and fixed test vectors). Must be nonzero.
inline PasswordExponent password_exponent_from_scalar(Scalar s, const Group& group) {
  if (s.is_zero()) throw Error(Errc::OutOfRange, "password exponent must be nonzero");
  return PasswordExponent(std::move(s), group.name());
}

class Session {
 public:
  /// Draws r and returns the session with own_y = g^r * h^pass. Needs no inbound message.
  /// r is redrawn in the rare case own_y would be the identity, which the peer must reject.
  static Session start(Role role, const Group& group, PasswordExponent pass, RandomSource& rng) {
    for (;;) {
      Scalar r = group.random_scalar(rng);
      Element y = mask(group, r, pass);
      if (!y.is_identity()) return Session(role, group, std::move(pass), std::move(r), std::move(y));
    }
  }

  /// Deterministic variant with a caller-chosen ephemeral exponent in [1, q-1].
  /// Throws IdentityElement if g^r * h^pass = 1.
  static Session start(Role role, const Group& group, PasswordExponent pass, Scalar r) {
    if (r.is_zero()) throw Error(Errc::OutOfRange, "ephemeral exponent must be nonzero");
    Element y = mask(group, r, pass);
    if (y.is_identity()) throw Error(Errc::IdentityElement, "own element would be the identity");
    return Session(role, group, std::move(pass), std::move(r), std::move(y));
  }

  Role role() const noexcept { return role_; }
  Phase phase() const noexcept { return phase_; }
  const Group& group() const noexcept { return group_; }
  std::optional<Errc> failure() const noexcept { return failure_; }
  const Element& own_y() const noexcept { return own_y_; }
  const std::optional<Element>& peer_y() const noexcept { return peer_y_; }
  bool has_ephemeral() const noexcept { return r_.has_value(); }
  bool has_password() const noexcept { return pass_.has_value(); }

  const Element& keying_material() const {
    if (!km_) throw Error(Errc::WrongPhase, "no keying material in phase " + std::string(to_string(phase_)));
    return *km_;
  }

  /// y1 is always the client's value, y2 the server's, independent of arrival order.
  const Element& y1() const { return role_ == Role::Client ? own_y_ : require_peer(); }
  const Element& y2() const { return role_ == Role::Server ? own_y_ : require_peer(); }

  /// Validates the peer's element and computes km; a bad element or km = 1 ends in Failed.
  Session absorb(const Int& peer_raw) && {
    require(phase_ == Phase::Started, "absorb");
    try {
      peer_y_ = group_.validate_element(peer_raw);
    } catch (const Error& e) {
      return std::move(*this).fail(e.code());
    }
    return std::move(*this).amplify();
  }

  Session absorb(ByteView peer_encoded) && {
    require(phase_ == Phase::Started, "absorb");
    try {
      peer_y_ = group_.decode_element(peer_encoded);
    } catch (const Error& e) {
      return std::move(*this).fail(e.code());
    }
    return std::move(*this).amplify();
  }

  /// Own-role verifier: v1 for the server, v2 for the client.
  VerifierValue make_verifier() const {
    require(phase_ == Phase::Amplified || phase_ == Phase::ConfirmedPeer, "make_verifier");
    return VerifierValue{keyed_hash(own_tag())};
  }

  /// Compares against the verifier the peer should have produced, in constant time.
  Session check_verifier(const VerifierValue& received) && {
    require(phase_ == Phase::Amplified, "check_verifier");
    const Digest expected = keyed_hash(peer_tag());
    if (!ct_equal(expected, received.bytes)) return std::move(*this).fail(Errc::VerificationFailed);
    phase_ = Phase::ConfirmedPeer;
    pass_.reset();
    return std::move(*this);
  }

  /// Released only after the peer has been confirmed.
  SessionKey derive_session_key() const {
    require(phase_ == Phase::ConfirmedPeer, "derive_session_key");
    return SessionKey{keyed_hash(kTagSessionKey)};
  }

  /// Terminal transition for externally detected failures (peer abort, transport loss).
  Session abort(Errc reason) && { return std::move(*this).fail(reason); }

 private:
  Session(Role role, Group group, PasswordExponent pass, Scalar r, Element own_y)
      : role_(role), group_(std::move(group)), pass_(pass.scalar()), r_(std::move(r)), own_y_(std::move(own_y)) {}

  static Element mask(const Group& group, const Scalar& r, const PasswordExponent& pass) {
    return group.mul(group.power(group.g(), r), group.power(group.h(), pass.scalar()));
  }

  void require(bool ok, const char* op) const {
    if (!ok) throw Error(Errc::WrongPhase, std::string(op) + " not allowed in phase " + std::string(to_string(phase_)));
  }

  const Element& require_peer() const {
    if (!peer_y_) throw Error(Errc::WrongPhase, "peer element not yet absorbed");
    return *peer_y_;
  }

  std::uint8_t own_tag() const { return role_ == Role::Server ? kTagServer : kTagClient; }
  std::uint8_t peer_tag() const { return role_ == Role::Server ? kTagClient : kTagServer; }

  Digest keyed_hash(std::uint8_t tag) const {
    Bytes key = group_.encode_element(*km_);
    Bytes msg;
    msg.reserve(1 + 2 * group_.element_width());
    msg.push_back(tag);
    Bytes e1 = group_.encode_element(y1());
    Bytes e2 = group_.encode_element(y2());
    msg.insert(msg.end(), e1.begin(), e1.end());
    msg.insert(msg.end(), e2.begin(), e2.end());
    Digest out = hmac_sha256(key, msg);
    OPENSSL_cleanse(key.data(), key.size());
    return out;
  }

  Session amplify() && {
    // h^-pass as h^(q - pass): stays on the constant-time exponent path.
    Scalar neg_pass = group_.scalar(group_.q() - pass_->value());
    Element unmasked = group_.mul(*peer_y_, group_.power(group_.h(), neg_pass));
    Element km = group_.power(unmasked, *r_);
    r_.reset();
    if (km.is_identity()) return std::move(*this).fail(Errc::IdentityKeyingMaterial);
    km_ = std::move(km);
    phase_ = Phase::Amplified;
    return std::move(*this);
  }

  Session fail(Errc reason) && {
    phase_ = Phase::Failed;
    failure_ = reason;
    km_.reset();
    r_.reset();
    pass_.reset();
    return std::move(*this);
  }

  Role role_;
  Group group_;
  std::optional<Scalar> pass_;
  std::optional<Scalar> r_;
  Element own_y_;
  std::optional<Element> peer_y_;
  std::optional<Element> km_;
  Phase phase_ = Phase::Started;
  std::optional<Errc> failure_;
};

}  // namespace pake
