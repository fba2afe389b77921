#pragma once

// Prime-order subgroup of F_p^* with two generators g, h whose discrete-log
// relation must be unknown to both parties.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pake/bigint.hpp"
#include "pake/constants.hpp"
#include "pake/crypto.hpp"
#include "pake/error.hpp"
#include "pake/random.hpp"

namespace pake {

/// Unvalidated (p, q, g, h) record, e.g. straight from a parameter file.
struct ParamsCandidate {
  std::string name;
  Int p;
  Int q;
  Int g;
  Int h;
};

/// Validated parameters. Only produced by validate_params.
struct GroupParams {
  std::string name;
  Int p;
  Int q;
  Int g;
  Int h;
  std::size_t width = 0;  // byte length of p; every element encodes to exactly this many bytes

  bool operator==(const GroupParams& o) const { return p == o.p && q == o.q && g == o.g && h == o.h; }
};

class Group;

/// A member of the order-q subgroup, bound to the parameters it was validated against.
class Element {
 public:
  const Int& value() const noexcept { return value_; }
  const GroupParams& params() const noexcept { return *params_; }
  bool is_identity() const { return value_ == 1; }

  bool operator==(const Element& o) const { return value_ == o.value_ && *params_ == *o.params_; }

 private:
  friend class Group;
  Element(Int v, std::shared_ptr<const GroupParams> params) : value_(std::move(v)), params_(std::move(params)) {}

  Int value_;
  std::shared_ptr<const GroupParams> params_;
};

/// Exponent in [0, q-1]. Limbs are wiped on destruction.
class Scalar {
 public:
  Scalar(const Scalar&) = default;
  Scalar(Scalar&&) noexcept = default;
  Scalar& operator=(const Scalar&) = default;
  Scalar& operator=(Scalar&&) noexcept = default;
  ~Scalar() { wipe(value_); }

  const Int& value() const noexcept { return value_; }
  bool is_zero() const { return value_ == 0; }
  bool operator==(const Scalar& o) const { return value_ == o.value_; }

 private:
  friend class Group;
  explicit Scalar(Int v) : value_(std::move(v)) {}

  Int value_;
};

namespace detail {

// Error bound 4^-64 = 2^-128 for the Miller-Rabin rounds.
inline constexpr int kPrimalityReps = 64;

inline bool is_probable_prime(const Int& n) {
  return n > 1 && mpz_probab_prime_p(n.get_mpz_t(), kPrimalityReps) > 0;
}

inline Int powm_public(const Int& base, const Int& e, const Int& m) {
  Int r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

// Odd modulus required; e = 0 handled separately since mpz_powm_sec needs e > 0.
inline Int powm_secret(const Int& base, const Int& e, const Int& m) {
  if (e == 0) return Int(1);
  Int r;
  mpz_powm_sec(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline bool in_subgroup(const Int& x, const Int& p, const Int& q) {
  return x > 1 && x < p && powm_public(x, q, p) == 1;
}

}  // namespace detail

class Group {
 public:
  /// Built-in sets: "toy23" and "modp2048". Throws UnknownParamSet otherwise.
  static Group builtin(std::string_view name);

  const GroupParams& params() const noexcept { return *params_; }
  const std::string& name() const noexcept { return params_->name; }
  const Int& p() const noexcept { return params_->p; }
  const Int& q() const noexcept { return params_->q; }
  std::size_t element_width() const noexcept { return params_->width; }

  Element g() const { return Element(params_->g, params_); }
  Element h() const { return Element(params_->h, params_); }
  Element identity() const { return Element(Int(1), params_); }

  bool same_params(const Group& o) const { return params_ == o.params_ || *params_ == *o.params_; }

  /// Range check only: 0 <= v < q.
  Scalar scalar(const Int& v) const {
    if (v < 0 || v >= q()) throw Error(Errc::OutOfRange, "scalar outside [0, q-1]");
    return Scalar(v);
  }

  /// base^e mod p, constant-time in e.
  Element power(const Element& base, const Scalar& e) const {
    check_bound(base);
    return Element(detail::powm_secret(base.value(), e.value(), p()), params_);
  }

  Element mul(const Element& a, const Element& b) const {
    check_bound(a);
    check_bound(b);
    Int r = a.value() * b.value();
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), p().get_mpz_t());
    return Element(std::move(r), params_);
  }

  Element invert(const Element& a) const {
    check_bound(a);
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.value().get_mpz_t(), p().get_mpz_t()) == 0)
      throw Error(Errc::OutOfRange, "element not invertible");
    return Element(std::move(r), params_);
  }

  /// Accepts iff 1 < raw < p and raw^q = 1 (mod p). Applied to every peer-supplied value.
  Element validate_element(const Int& raw) const {
    if (raw == 1) throw Error(Errc::IdentityElement, "identity element rejected");
    if (raw <= 0 || raw >= p()) throw Error(Errc::OutOfRange, "element outside [1, p-1]");
    if (detail::powm_public(raw, q(), p()) != 1) throw Error(Errc::NotInSubgroup, "element not in order-q subgroup");
    return Element(raw, params_);
  }

  Bytes encode_element(const Element& x) const {
    check_bound(x);
    return to_fixed_bytes(x.value(), element_width());
  }

  Element decode_element(ByteView bytes) const {
    if (bytes.size() != element_width())
      throw Error(Errc::BadLength, "expected " + std::to_string(element_width()) + " bytes, got " +
                                       std::to_string(bytes.size()));
    return validate_element(from_bytes(bytes));
  }

  /// Uniform in [1, q-1] by rejection sampling on [0, 2^bits(q)).
  Scalar random_scalar(RandomSource& rng) const {
    const std::size_t bits = bit_length(q());
    const std::size_t nbytes = (bits + 7) / 8;
    const unsigned excess = static_cast<unsigned>(nbytes * 8 - bits);
    Bytes buf(nbytes);
    for (;;) {
      rng.fill(buf);
      buf[0] &= static_cast<std::uint8_t>(0xffu >> excess);
      Int v = from_bytes(buf);
      OPENSSL_cleanse(buf.data(), buf.size());
      if (v != 0 && v < q()) return Scalar(std::move(v));
      wipe(v);
    }
  }

  /// Same p, q and name with a different generator pair (validated).
  Group with_generators(const Int& g, const Int& h) const;

 private:
  friend Group validate_params(const ParamsCandidate&);
  explicit Group(std::shared_ptr<const GroupParams> params) : params_(std::move(params)) {}

  void check_bound(const Element& x) const {
    if (&x.params() != params_.get() && !(x.params() == *params_))
      throw Error(Errc::ParamsMismatch, "element belongs to different parameters");
  }

  std::shared_ptr<const GroupParams> params_;
};

/// Checks every invariant and reports all violations at once.
inline Group validate_params(const ParamsCandidate& c) {
  std::vector<Violation> bad;
  const bool p_prime = detail::is_probable_prime(c.p);
  const bool q_prime = detail::is_probable_prime(c.q);
  if (!p_prime) bad.push_back({Errc::NotPrime, "p"});
  if (!q_prime) bad.push_back({Errc::NotPrime, "q"});
  const bool order_ok = c.p > 2 && c.q > 0 && mpz_divisible_p(Int(c.p - 1).get_mpz_t(), c.q.get_mpz_t()) != 0;
  if (!order_ok) bad.push_back({Errc::OrderMismatch, "q does not divide p-1"});
  if (c.p > 2) {
    if (!detail::in_subgroup(c.g, c.p, c.q)) bad.push_back({Errc::BadGenerator, "g"});
    if (!detail::in_subgroup(c.h, c.p, c.q)) bad.push_back({Errc::BadGenerator, "h"});
  } else {
    bad.push_back({Errc::BadGenerator, "modulus too small"});
  }
  if (c.g == c.h) bad.push_back({Errc::GeneratorsEqual, "g == h"});
  if (c.name.size() > 255) bad.push_back({Errc::ParamFile, "name longer than 255 bytes"});
  if (!bad.empty()) throw ParamsError(std::move(bad));

  auto params = std::make_shared<GroupParams>();
  params->name = c.name;
  params->p = c.p;
  params->q = c.q;
  params->g = c.g;
  params->h = c.h;
  params->width = byte_length(c.p);
  return Group(std::move(params));
}

/// h = H(0x68 || encode(g) || counter)^((p-1)/q) mod p for the first counter giving h not in {0, 1, g}.
inline Int derive_h(const Int& g, const Int& p, const Int& q) {
  if (p <= 2 || q <= 0 || mpz_divisible_p(Int(p - 1).get_mpz_t(), q.get_mpz_t()) == 0)
    throw Error(Errc::OrderMismatch, "q does not divide p-1");
  if (!detail::in_subgroup(g, p, q)) throw Error(Errc::BadGenerator, "g");
  const Int cofactor = (p - 1) / q;
  const Bytes encoded_g = to_fixed_bytes(g, byte_length(p));
  for (unsigned counter = 0; counter <= 255; ++counter) {
    Digest d = Sha256().update(kDsDeriveH).update(encoded_g).update(static_cast<std::uint8_t>(counter)).finish();
    Int x = from_bytes(d) % p;
    Int h = detail::powm_public(x, cofactor, p);
    if (h != 0 && h != 1 && h != g) return h;
  }
  throw Error(Errc::DerivationFailed, "no counter in [0, 255] produced a usable h");
}

inline Group Group::with_generators(const Int& g, const Int& h) const {
  return validate_params(ParamsCandidate{name(), p(), q(), g, h});
}

/// True for groups small enough to enumerate (q < 2^20).
inline bool is_toy_scale(const Group& group) { return bit_length(group.q()) <= 20; }

namespace detail {

// RFC 3526, 2048-bit MODP group (group 14).
inline constexpr std::string_view kModp2048Hex =
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74"
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437"
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed"
    "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05"
    "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb"
    "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b"
    "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718"
    "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff";

inline Group make_toy23() {
  // h = 2^2: its discrete log is known. Algebra tests only, never real use.
  return validate_params(ParamsCandidate{"toy23", Int(23), Int(11), Int(2), Int(4)});
}

inline Group make_modp2048() {
  Int p = from_hex(kModp2048Hex);
  Int q = (p - 1) / 2;
  Int g(4);
  Int h = derive_h(g, p, q);
  return validate_params(ParamsCandidate{"modp2048", std::move(p), std::move(q), std::move(g), std::move(h)});
}

}  // namespace detail

inline Group Group::builtin(std::string_view name) {
  if (name == "toy23") {
    static const Group toy = detail::make_toy23();
    return toy;
  }
  if (name == "modp2048") {
    static const Group modp = detail::make_modp2048();
    return modp;
  }
  throw Error(Errc::UnknownParamSet, std::string(name));
}

}  // namespace pake
