#pragma once

// Commit-reveal negotiation of (g, h) from a base generator g_b:
//   client: g = g_b^s1, sends SHA-256(0x63 || encode(g))
//   server: h = g_b^s2, only after a commitment is recorded
//   client: reveals g; server checks it against the commitment.
// Only the client commits; the server's h is fixed by the time g is revealed.

#include <optional>
#include <utility>

#include "pake/constants.hpp"
#include "pake/crypto.hpp"
#include "pake/group.hpp"

namespace pake {

using Commitment = Digest;

inline Commitment commit_generator(const Group& group, const Element& g) {
  return Sha256().update(kDsCommit).update(group.encode_element(g)).finish();
}

struct ClientContribution {
  Element g;
  Commitment commitment;
};

inline ClientContribution neg_client_start(const Group& base, const Scalar& s1) {
  if (s1.is_zero()) throw Error(Errc::OutOfRange, "s1 must be nonzero");
  Element g = base.power(base.g(), s1);
  Commitment c = commit_generator(base, g);
  return {std::move(g), c};
}

/// s1 is drawn and dropped inside; it is not needed after g is formed.
inline ClientContribution neg_client_start(const Group& base, RandomSource& rng) {
  return neg_client_start(base, base.random_scalar(rng));
}

inline Element neg_server_respond(const Group& base, const Scalar& s2) {
  if (s2.is_zero()) throw Error(Errc::OutOfRange, "s2 must be nonzero");
  return base.power(base.g(), s2);
}

/// Accepts the revealed g iff it matches the commitment, lies in the subgroup, and differs from h.
inline Group neg_server_verify(const Group& base, const Commitment& commitment, const Int& revealed_g,
                               const Element& h) {
  // Anything that cannot be encoded at the fixed width cannot match a commitment.
  if (revealed_g < 0 || byte_length(revealed_g) > base.element_width())
    throw Error(Errc::CommitmentMismatch, "revealed g does not match commitment");
  const Commitment recomputed =
      Sha256().update(kDsCommit).update(to_fixed_bytes(revealed_g, base.element_width())).finish();
  if (!ct_equal(recomputed, commitment)) throw Error(Errc::CommitmentMismatch, "revealed g does not match commitment");
  Element g = base.validate_element(revealed_g);
  if (g == h) throw Error(Errc::GeneratorsEqual, "revealed g equals h");
  return base.with_generators(g.value(), h.value());
}

/// Server half as a state machine: h is only ever produced after a commitment is recorded.
class NegotiationServer {
 public:
  explicit NegotiationServer(Group base) : base_(std::move(base)) {}

  bool has_commitment() const noexcept { return commitment_.has_value(); }

  Element respond(const Commitment& commitment, RandomSource& rng) {
    return respond(commitment, base_.random_scalar(rng));
  }

  Element respond(const Commitment& commitment, const Scalar& s2) {
    if (commitment_) throw Error(Errc::WrongPhase, "commitment already recorded");
    commitment_ = commitment;
    h_ = neg_server_respond(base_, s2);
    return *h_;
  }

  Group verify(const Int& revealed_g) const {
    if (!commitment_ || !h_) throw Error(Errc::WrongPhase, "no commitment recorded");
    return neg_server_verify(base_, *commitment_, revealed_g, *h_);
  }

 private:
  Group base_;
  std::optional<Commitment> commitment_;
  std::optional<Element> h_;
};

class NegotiationClient {
 public:
  explicit NegotiationClient(Group base) : base_(std::move(base)) {}

  Commitment start(RandomSource& rng) { return start(base_.random_scalar(rng)); }

  Commitment start(const Scalar& s1) {
    if (g_) throw Error(Errc::WrongPhase, "negotiation already started");
    auto c = neg_client_start(base_, s1);
    g_ = std::move(c.g);
    return c.commitment;
  }

  /// Takes the server's h (validated here), returns the negotiated group and the g to reveal.
  std::pair<Group, Element> finish(const Int& h_raw) const {
    if (!g_) throw Error(Errc::WrongPhase, "negotiation not started");
    Element h = base_.validate_element(h_raw);
    if (h == *g_) throw Error(Errc::GeneratorsEqual, "server h equals client g");
    return {base_.with_generators(g_->value(), h.value()), *g_};
  }

  const Group& base() const noexcept { return base_; }

 private:
  Group base_;
  std::optional<Element> g_;
};

}  // namespace pake
