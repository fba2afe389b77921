#pragma once

// Message-driven session driver. Feeds inbound frames to a Session and yields
// the outbound frames, enforcing the accepted order:
//   [COMMIT -> HGEN -> REVEAL]  {Y1, Y2 in either order}  V1  V2
// Anything else ends the session and produces an ABORT frame.
// Transport-free, so the same driver runs over TCP and in-memory tests.

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "pake/negotiate.hpp"
#include "pake/protocol.hpp"
#include "pake/wire.hpp"

namespace pake {

enum class Outcome { Running, Accepted, Rejected };

enum class RejectReason { Auth, Protocol, Element, PeerAbort, Transport };

constexpr std::string_view to_string(RejectReason r) noexcept {
  switch (r) {
    case RejectReason::Auth: return "auth";
    case RejectReason::Protocol: return "protocol";
    case RejectReason::Element: return "element";
    case RejectReason::PeerAbort: return "peer-abort";
    case RejectReason::Transport: return "transport";
  }
  return "?";
}

struct HandshakeOptions {
  bool negotiate = false;
  bool eager = false;  // server only: send Y2 before Y1 arrives
};

struct TranscriptEntry {
  bool outbound;
  Bytes frame;
};

class Handshake {
 public:
  Handshake(Role role, Group group, PasswordExponent pass, RandomSource& rng, HandshakeOptions opts = {})
      : role_(role), base_(std::move(group)), group_(base_), pass_(std::move(pass)), rng_(&rng), opts_(opts) {}

  Role role() const noexcept { return role_; }
  Outcome outcome() const noexcept { return outcome_; }
  std::optional<RejectReason> reason() const noexcept { return reason_; }
  const std::optional<Session>& session() const noexcept { return session_; }
  const Group& group() const noexcept { return group_; }
  const std::vector<TranscriptEntry>& transcript() const noexcept { return transcript_; }

  std::optional<SessionKey> session_key() const {
    if (outcome_ != Outcome::Accepted || !session_) return std::nullopt;
    return session_->derive_session_key();
  }

  /// Frames to send before anything has been received.
  std::vector<Bytes> begin() {
    if (began_) throw Error(Errc::WrongPhase, "begin called twice");
    began_ = true;
    Out out;
    if (role_ == Role::Client) {
      if (opts_.negotiate) {
        negotiation_client_.emplace(base_);
        Commitment c = negotiation_client_->start(*rng_);
        out.push({MsgType::Commit, Bytes(c.begin(), c.end())});
        expect_ = Expect::HGen;
      } else {
        start_session();
        out.push({MsgType::Y1, own_y_bytes()});
        expect_ = Expect::Y2;
      }
    } else {
      if (opts_.negotiate) {
        negotiation_server_.emplace(base_);
        expect_ = Expect::Commit;
      } else {
        if (opts_.eager) {
          start_session();
          out.push({MsgType::Y2, own_y_bytes()});
        }
        expect_ = Expect::Y1;
      }
    }
    return record(std::move(out));
  }

  std::vector<Bytes> receive(ByteView frame) {
    transcript_.push_back({false, Bytes(frame.begin(), frame.end())});
    if (outcome_ == Outcome::Rejected) return {};
    WireMessage msg;
    try {
      msg = decode_message(frame);
    } catch (const Error&) {
      return record(reject(RejectReason::Protocol, AbortReason::Protocol));
    }
    return record(dispatch(msg));
  }

  /// Orderly close by the peer. Only a client that already sent V2 treats this as success.
  void peer_closed() {
    if (outcome_ == Outcome::Running) reject(RejectReason::Transport, std::nullopt);
  }

 private:
  enum class Expect { Nothing, Commit, HGen, Reveal, Y1, Y2, V1, V2, Done };

  struct Out {
    std::vector<WireMessage> msgs;
    void push(WireMessage m) { msgs.push_back(std::move(m)); }
  };

  std::vector<Bytes> record(Out out) {
    std::vector<Bytes> frames;
    for (auto& m : out.msgs) {
      frames.push_back(encode_message(m));
      transcript_.push_back({true, frames.back()});
    }
    return frames;
  }

  void start_session() { session_ = Session::start(role_, group_, pass_, *rng_); }

  Bytes own_y_bytes() const { return group_.encode_element(session_->own_y()); }

  Out reject(RejectReason why, std::optional<AbortReason> tell_peer) {
    outcome_ = Outcome::Rejected;
    reason_ = why;
    expect_ = Expect::Done;
    if (session_ && session_->phase() != Phase::Failed) session_ = std::move(*session_).abort(why == RejectReason::Auth ? Errc::VerificationFailed : Errc::Aborted);
    Out out;
    if (tell_peer) out.push(abort_message(*tell_peer));
    return out;
  }

  Out dispatch(const WireMessage& msg) {
    if (msg.type == MsgType::Abort) {
      const bool auth = msg.payload.size() == 1 && msg.payload[0] == static_cast<std::uint8_t>(AbortReason::Auth);
      return reject(auth ? RejectReason::Auth : RejectReason::PeerAbort, std::nullopt);
    }
    try {
      switch (expect_) {
        case Expect::Commit:
          if (msg.type == MsgType::Commit) return on_commit(msg.payload);
          break;
        case Expect::HGen:
          if (msg.type == MsgType::HGen) return on_hgen(msg.payload);
          break;
        case Expect::Reveal:
          if (msg.type == MsgType::Reveal) return on_reveal(msg.payload);
          break;
        case Expect::Y1:
          if (msg.type == MsgType::Y1) return on_peer_y(msg.payload);
          break;
        case Expect::Y2:
          if (msg.type == MsgType::Y2) return on_peer_y(msg.payload);
          break;
        case Expect::V1:
          if (msg.type == MsgType::V1) return on_verifier(msg.payload);
          break;
        case Expect::V2:
          if (msg.type == MsgType::V2) return on_verifier(msg.payload);
          break;
        case Expect::Nothing:
        case Expect::Done:
          break;
      }
    } catch (const Error&) {
      return reject(RejectReason::Protocol, AbortReason::Protocol);
    }
    return reject(RejectReason::Protocol, AbortReason::Protocol);
  }

  Out on_commit(const Bytes& payload) {
    if (payload.size() != Commitment{}.size()) throw Error(Errc::BadLength, "commitment");
    Commitment c{};
    std::copy(payload.begin(), payload.end(), c.begin());
    Element h = negotiation_server_->respond(c, *rng_);
    expect_ = Expect::Reveal;
    Out out;
    out.push({MsgType::HGen, base_.encode_element(h)});
    return out;
  }

  Out on_hgen(const Bytes& payload) {
    if (payload.size() != base_.element_width()) throw Error(Errc::BadLength, "HGEN");
    auto [negotiated, g] = negotiation_client_->finish(from_bytes(payload));
    group_ = std::move(negotiated);
    Out out;
    out.push({MsgType::Reveal, base_.encode_element(g)});
    start_session();
    out.push({MsgType::Y1, own_y_bytes()});
    expect_ = Expect::Y2;
    return out;
  }

  Out on_reveal(const Bytes& payload) {
    if (payload.size() != base_.element_width()) throw Error(Errc::BadLength, "REVEAL");
    group_ = negotiation_server_->verify(from_bytes(payload));
    Out out;
    if (opts_.eager) {
      start_session();
      out.push({MsgType::Y2, own_y_bytes()});
    }
    expect_ = Expect::Y1;
    return out;
  }

  Out on_peer_y(const Bytes& payload) {
    Out out;
    if (!session_) {
      start_session();
      out.push({MsgType::Y2, own_y_bytes()});
    }
    session_ = std::move(*session_).absorb(ByteView(payload));
    if (session_->phase() == Phase::Failed) {
      // Discard anything queued; nothing is disclosed after a bad element.
      return reject(RejectReason::Element, AbortReason::Protocol);
    }
    if (role_ == Role::Server) {
      out.push({MsgType::V1, verifier_bytes()});
      expect_ = Expect::V2;
    } else {
      expect_ = Expect::V1;
    }
    return out;
  }

  Out on_verifier(const Bytes& payload) {
    if (payload.size() != VerifierValue{}.bytes.size()) throw Error(Errc::BadLength, "verifier");
    VerifierValue v;
    std::copy(payload.begin(), payload.end(), v.bytes.begin());
    session_ = std::move(*session_).check_verifier(v);
    if (session_->phase() != Phase::ConfirmedPeer) return reject(RejectReason::Auth, AbortReason::Auth);
    Out out;
    if (role_ == Role::Client) out.push({MsgType::V2, verifier_bytes()});
    outcome_ = Outcome::Accepted;
    // A client may still learn of a V2 rejection via ABORT before close.
    expect_ = Expect::Done;
    return out;
  }

  Bytes verifier_bytes() const {
    VerifierValue v = session_->make_verifier();
    return Bytes(v.bytes.begin(), v.bytes.end());
  }

  Role role_;
  Group base_;
  Group group_;
  PasswordExponent pass_;
  RandomSource* rng_;
  HandshakeOptions opts_;
  bool began_ = false;
  Expect expect_ = Expect::Nothing;
  Outcome outcome_ = Outcome::Running;
  std::optional<RejectReason> reason_;
  std::optional<Session> session_;
  std::optional<NegotiationClient> negotiation_client_;
  std::optional<NegotiationServer> negotiation_server_;
  std::vector<TranscriptEntry> transcript_;
};

}  // namespace pake
