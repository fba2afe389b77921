#include <gtest/gtest.h>

#include <random>

#include "pake/params_file.hpp"
#include "pake/protocol.hpp"
#include "support/toy.hpp"

namespace {

using namespace pake;
using pake::testing::pw;
using pake::testing::sc;
using pake::testing::toy;

// Reference values from an independent Python implementation (hashlib/hmac)
// for toy23, pass = 3, r1 = 4, r2 = 7.
constexpr const char* kV1 = "9f8cc1a7074372ff39c5b6082212a8cf508869d2e0503839e55c0c212135db01";
constexpr const char* kV2 = "932f363cb7c71b9bb460744775b69531db329eaf8e75e2f7d784d50f5179e7f1";
constexpr const char* kSessionKey = "6a3992caa43f4b92c7ec2cfe282eea399459974d7a7d34921e8a08b22bcca55e";
constexpr const char* kFingerprint = "8b9114ec";

struct Pair {
  Session client;
  Session server;
};

Pair amplified(const Group& g, unsigned long pc, unsigned long r1, unsigned long ps, unsigned long r2) {
  Session c = Session::start(Role::Client, g, pw(g, pc), sc(g, r1));
  Session s = Session::start(Role::Server, g, pw(g, ps), sc(g, r2));
  Int y1 = c.own_y().value();
  Int y2 = s.own_y().value();
  return {std::move(c).absorb(y2), std::move(s).absorb(y1)};
}

Pair confirmed(const Group& g) {
  Pair p = amplified(g, 3, 4, 3, 7);
  VerifierValue v1 = p.server.make_verifier();
  p.client = std::move(p.client).check_verifier(v1);
  VerifierValue v2 = p.client.make_verifier();
  p.server = std::move(p.server).check_verifier(v2);
  return p;
}

TEST(PasswordToExponent, DeterministicAndInRange) {
  Group g = toy();
  PasswordExponent a = password_to_exponent("hunter2", g);
  PasswordExponent b = password_to_exponent("hunter2", g);
  EXPECT_EQ(a.scalar(), b.scalar());
  EXPECT_EQ(a.context(), "toy23");
  // Python reference: attempt 0 reduces to 0 mod 11, attempt 1 gives 10.
  EXPECT_EQ(a.scalar().value(), 10);
}

TEST(PasswordToExponent, ModpReference) {
  Group g = pake::testing::modp();
  EXPECT_EQ(to_hex(password_to_exponent("hunter2", g).scalar().value()),
            "14a29146927dd1280770b05e4e4aaf5e66b2ecd621f4deefd31919999be0a72d6de9792d95f06252f0d81c19bc1550d573b10526e97cf"
            "5fb59d1b1229b9da95255ef27dd9c31864bf04bca015722ddf169d311d23e18f8c3f3af20a4c9c93e13e4bb48694b7b7576fde5d5251"
            "bec3a9d94806e777741a5ad6722ab79cf0d77f9c9fb31a1d85beb7bf84b1afcfdad5b9a9af966a8c1d91d95d6ce2ebbf3dd9d8234a46"
            "6b2bbb517a1c789af936a3e04a87637f26bf7d8c63d42b938f7355b6664e0c07dce730f5a5a53487b1630b51f72d931017350e77018b"
            "d029cce25ee6e4c36bcb445c8be585beb622f9fc7d6a3e8f86c9258c219a901689aea9e2fc3438b");
}

TEST(PasswordToExponent, EmptyRejected) {
  try {
    password_to_exponent("", toy());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyPassword);
  }
}

TEST(PasswordToExponent, BoundToParameterSetName) {
  Group a = toy();
  Group b = load_params_text("name=other\np=17\nq=b\ng=2\nh=4\n");
  EXPECT_EQ(password_to_exponent("x", b).context(), "other");
  int differ = 0;
  for (int i = 0; i < 20; ++i) {
    const std::string p = "password" + std::to_string(i);
    if (!(password_to_exponent(p, a).scalar() == password_to_exponent(p, b).scalar())) ++differ;
  }
  EXPECT_GT(differ, 0);
}

TEST(PasswordToExponent, OneByteChangesCollideAtChanceRate) {
  std::mt19937_64 gen(99);
  Group t = toy();
  Group m = pake::testing::modp();
  int toy_collisions = 0;
  int modp_collisions = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string a(8 + gen() % 8, 'x');
    for (auto& ch : a) ch = static_cast<char>('!' + gen() % 90);
    std::string b = a;
    const std::size_t at = gen() % b.size();
    b[at] = static_cast<char>(b[at] == '~' ? '!' : b[at] + 1);
    if (password_to_exponent(a, t).scalar() == password_to_exponent(b, t).scalar()) ++toy_collisions;
    if (password_to_exponent(a, m).scalar() == password_to_exponent(b, m).scalar()) ++modp_collisions;
  }
  // Uniform on [1,10]: Binomial(1000, 0.1), mean 100, sd 9.49; allow mean + 4 sd.
  EXPECT_LE(toy_collisions, 137);
  EXPECT_EQ(modp_collisions, 0);
}

TEST(SessionStart, ForcedEphemerals) {
  Group g = toy();
  EXPECT_EQ(pake::testing::naive_pow(2, 4, 23) * pake::testing::naive_pow(4, 3, 23) % 23, 12u);
  EXPECT_EQ(Session::start(Role::Client, g, pw(g, 3), sc(g, 4)).own_y().value(), 12);
  EXPECT_EQ(pake::testing::naive_pow(2, 7, 23) * pake::testing::naive_pow(4, 3, 23) % 23, 4u);
  EXPECT_EQ(Session::start(Role::Server, g, pw(g, 3), sc(g, 7)).own_y().value(), 4);
  EXPECT_THROW(Session::start(Role::Client, g, pw(g, 3), sc(g, 0)), Error);
}

TEST(SessionStart, IdentityOwnElementRefused) {
  Group g = toy();
  // g^r * h^3 = 2^(r+6) = 1 for r = 5.
  EXPECT_THROW(Session::start(Role::Client, g, pw(g, 3), sc(g, 5)), Error);
  SeededRandom rng(5);
  for (int i = 0; i < 200; ++i) EXPECT_FALSE(Session::start(Role::Client, g, pw(g, 3), rng).own_y().is_identity());
}

TEST(SessionStart, IndependentRngsDiffer) {
  Group g = pake::testing::modp();
  SystemRandom rng;
  Session a = Session::start(Role::Client, g, password_to_exponent("pw", g), rng);
  Session b = Session::start(Role::Client, g, password_to_exponent("pw", g), rng);
  EXPECT_NE(a.own_y(), b.own_y());
}

TEST(SessionAbsorb, MatchingPasswordsShareKm) {
  Group g = toy();
  Pair p = amplified(g, 3, 4, 3, 7);
  EXPECT_EQ(pake::testing::naive_pow(2, 28 % 11, 23), 18u);
  EXPECT_EQ(p.client.phase(), Phase::Amplified);
  EXPECT_EQ(p.server.phase(), Phase::Amplified);
  EXPECT_EQ(p.client.keying_material().value(), 18);
  EXPECT_EQ(p.server.keying_material().value(), 18);
  EXPECT_FALSE(p.client.has_ephemeral());
  EXPECT_FALSE(p.server.has_ephemeral());
}

TEST(SessionAbsorb, MismatchedPasswordsDiverge) {
  Group g = toy();
  Pair p = amplified(g, 3, 4, 4, 5);
  EXPECT_EQ(p.server.own_y().value(), 4);
  EXPECT_EQ(p.client.keying_material().value(), 18);
  EXPECT_EQ(p.server.keying_material().value(), 12);
  VerifierValue v1 = p.server.make_verifier();
  VerifierValue v2 = p.client.make_verifier();
  EXPECT_EQ(std::move(p.client).check_verifier(v1).phase(), Phase::Failed);
  EXPECT_EQ(std::move(p.server).check_verifier(v2).phase(), Phase::Failed);
}

TEST(SessionAbsorb, BadPeerElementsFail) {
  Group g = toy();
  struct Case {
    long raw;
    Errc code;
  } cases[] = {{1, Errc::IdentityElement}, {5, Errc::NotInSubgroup}, {0, Errc::OutOfRange}, {23, Errc::OutOfRange}};
  for (const auto& c : cases) {
    Session s = Session::start(Role::Client, g, pw(g, 3), sc(g, 4));
    s = std::move(s).absorb(Int(c.raw));
    EXPECT_EQ(s.phase(), Phase::Failed);
    EXPECT_EQ(s.failure(), c.code) << c.raw;
    EXPECT_THROW(s.keying_material(), Error);
    EXPECT_THROW(s.make_verifier(), Error);
  }
  Session s = Session::start(Role::Client, g, pw(g, 3), sc(g, 4));
  s = std::move(s).absorb(ByteView(Bytes{0x04, 0x00}));
  EXPECT_EQ(s.failure(), Errc::BadLength);
}

TEST(SessionAbsorb, IdentityKeyingMaterialAborts) {
  Group g = toy();
  // Peer sends h^pass, so y_peer * h^-pass = 1.
  Session s = Session::start(Role::Server, g, pw(g, 3), sc(g, 7));
  s = std::move(s).absorb(Int(18));
  EXPECT_EQ(s.phase(), Phase::Failed);
  EXPECT_EQ(s.failure(), Errc::IdentityKeyingMaterial);
}

TEST(SessionAbsorb, SecondAbsorbIsWrongPhase) {
  Group g = toy();
  Pair p = amplified(g, 3, 4, 3, 7);
  try {
    (void)std::move(p.client).absorb(Int(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongPhase);
  }
}

TEST(Verifier, MatchesReference) {
  Group g = toy();
  Pair p = amplified(g, 3, 4, 3, 7);
  EXPECT_EQ(to_hex(p.server.make_verifier().bytes), kV1);
  EXPECT_EQ(to_hex(p.client.make_verifier().bytes), kV2);
  EXPECT_EQ(p.server.make_verifier(), p.server.make_verifier());
  EXPECT_NE(p.server.make_verifier(), p.client.make_verifier());
}

TEST(Verifier, TagBytes) {
  EXPECT_EQ(kTagServer, 0x00);
  EXPECT_EQ(kTagClient, 0x01);
  EXPECT_EQ(kTagSessionKey, 0x02);
  Group g = toy();
  Pair p = amplified(g, 3, 4, 3, 7);
  Bytes key{18};
  EXPECT_EQ(p.server.make_verifier().bytes, hmac_sha256(key, Bytes{0x00, 12, 4}));
  EXPECT_EQ(p.client.make_verifier().bytes, hmac_sha256(key, Bytes{0x01, 12, 4}));
}

TEST(Verifier, NotBeforeAmplification) {
  Group g = toy();
  Session s = Session::start(Role::Server, g, pw(g, 3), sc(g, 7));
  EXPECT_THROW(s.make_verifier(), Error);
  EXPECT_THROW((void)std::move(s).check_verifier({}), Error);
}

TEST(CheckVerifier, MatchingHandshakeConfirmsBothSides) {
  Pair p = confirmed(toy());
  EXPECT_EQ(p.client.phase(), Phase::ConfirmedPeer);
  EXPECT_EQ(p.server.phase(), Phase::ConfirmedPeer);
  EXPECT_FALSE(p.client.has_password());
  EXPECT_FALSE(p.server.has_password());
}

TEST(CheckVerifier, EverySingleBitFlipFails) {
  Group g = toy();
  for (int bit = 0; bit < 256; ++bit) {
    Pair p = amplified(g, 3, 4, 3, 7);
    VerifierValue v1 = p.server.make_verifier();
    v1.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    Session c = std::move(p.client).check_verifier(v1);
    EXPECT_EQ(c.phase(), Phase::Failed) << bit;
    EXPECT_EQ(c.failure(), Errc::VerificationFailed);
  }
}

TEST(CheckVerifier, ReflectedVerifierRejected) {
  Group g = toy();
  Pair p = amplified(g, 3, 4, 3, 7);
  VerifierValue own = p.client.make_verifier();
  EXPECT_EQ(std::move(p.client).check_verifier(own).phase(), Phase::Failed);
}

TEST(CheckVerifier, OnlyOnce) {
  Pair p = confirmed(toy());
  EXPECT_THROW((void)std::move(p.client).check_verifier({}), Error);
}

TEST(SessionKey, ReleasedOnlyAfterConfirmation) {
  Group g = toy();
  Pair a = amplified(g, 3, 4, 3, 7);
  EXPECT_THROW(a.client.derive_session_key(), Error);
  Pair p = confirmed(g);
  SessionKey kc = p.client.derive_session_key();
  SessionKey ks = p.server.derive_session_key();
  EXPECT_EQ(kc, ks);
  EXPECT_EQ(to_hex(kc.bytes), kSessionKey);
  EXPECT_EQ(fingerprint(kc), kFingerprint);
  EXPECT_NE(kc.bytes, p.client.make_verifier().bytes);
  EXPECT_NE(kc.bytes, p.server.make_verifier().bytes);
}

TEST(Transcript, CanonicalOnBothSides) {
  Pair p = amplified(toy(), 3, 4, 3, 7);
  EXPECT_EQ(p.client.y1(), p.server.y1());
  EXPECT_EQ(p.client.y2(), p.server.y2());
  EXPECT_EQ(p.client.y1().value(), 12);
  EXPECT_EQ(p.client.y2().value(), 4);
}

TEST(OrderIndependence, PeerValueBeforeOwnStart) {
  Group g = toy();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    // Schedule A: client starts, then server starts after seeing y1.
    SeededRandom ca(seed), sa(seed + 1000);
    Session c1 = Session::start(Role::Client, g, pw(g, 6), ca);
    Int y1 = c1.own_y().value();
    Session s1 = Session::start(Role::Server, g, pw(g, 6), sa);
    s1 = std::move(s1).absorb(y1);
    c1 = std::move(c1).absorb(s1.own_y().value());

    // Schedule B: server precomputes y2 before the client exists.
    SeededRandom cb(seed), sb(seed + 1000);
    Session s2 = Session::start(Role::Server, g, pw(g, 6), sb);
    Int y2 = s2.own_y().value();
    Session c2 = Session::start(Role::Client, g, pw(g, 6), cb);
    c2 = std::move(c2).absorb(y2);
    s2 = std::move(s2).absorb(c2.own_y().value());

    EXPECT_EQ(c1.keying_material(), c2.keying_material());
    EXPECT_EQ(s1.keying_material(), s2.keying_material());
    EXPECT_EQ(c1.make_verifier(), c2.make_verifier());
    EXPECT_EQ(s1.make_verifier(), s2.make_verifier());
  }
}

TEST(PhaseSafety, RandomCallSequencesNeverLeakFromStartedOrFailed) {
  Group g = toy();
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 500; ++trial) {
    SeededRandom rng(static_cast<std::uint64_t>(trial));
    Session s = Session::start(gen() % 2 ? Role::Client : Role::Server, g, pw(g, 1 + gen() % 10), rng);
    for (int step = 0; step < 6; ++step) {
      const Phase before = s.phase();
      const bool early = before == Phase::Started || before == Phase::Failed;
      switch (gen() % 4) {
        case 0:
          try {
            s = std::move(s).absorb(Int(static_cast<long>(gen() % 25)));
          } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::WrongPhase);
            EXPECT_NE(before, Phase::Started);
          }
          break;
        case 1:
          if (early) { EXPECT_THROW(s.make_verifier(), Error); }
          break;
        case 2:
          if (before != Phase::ConfirmedPeer) { EXPECT_THROW(s.derive_session_key(), Error); }
          break;
        default: {
          VerifierValue v;
          for (auto& b : v.bytes) b = static_cast<std::uint8_t>(gen());
          try {
            s = std::move(s).check_verifier(v);
            EXPECT_EQ(before, Phase::Amplified);
          } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::WrongPhase);
            EXPECT_NE(before, Phase::Amplified);
          }
        }
      }
      // Phases only move forward.
      if (before == Phase::Failed) { EXPECT_EQ(s.phase(), Phase::Failed); }
      if (before == Phase::ConfirmedPeer) { EXPECT_EQ(s.phase(), Phase::ConfirmedPeer); }
    }
  }
}

}  // namespace
