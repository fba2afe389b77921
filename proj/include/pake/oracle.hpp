#pragma once

// Exhaustive checks of the handshake algebra in enumerable groups.
//
// The toy sets exist only for these checks: with q = 11 every discrete log is
// a table lookup, so nothing here says anything about hardness. A real group
// needs log_g(h) to be unknown to everyone; dlog_bruteforce shows how quickly
// that fails when the group is small.

#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pake/group.hpp"
#include "pake/protocol.hpp"

namespace pake::oracle {

inline constexpr std::uint64_t kMaxEnumerableOrder = std::uint64_t{1} << 20;

struct Report {
  std::string check;
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::vector<std::pair<std::string, std::string>> stats;  // extra key=value fields, in order
  std::string counterexample;                              // first failing tuple, empty if none

  bool passed() const noexcept { return failures == 0; }

  std::string stat(const std::string& key) const {
    for (const auto& [k, v] : stats)
      if (k == key) return v;
    return {};
  }

  std::string line() const {
    std::ostringstream os;
    os << check << " cases=" << cases << " failures=" << failures;
    for (const auto& [k, v] : stats) os << ' ' << k << '=' << v;
    os << (passed() ? " PASS" : " FAIL");
    if (!counterexample.empty()) os << " counterexample=" << counterexample;
    return os.str();
  }

  void fail(const std::string& tuple) {
    ++failures;
    if (counterexample.empty()) counterexample = tuple;
  }
};

namespace detail {

inline std::uint64_t enumerable_order(const Group& group) {
  if (group.q() > kMaxEnumerableOrder) throw Error(Errc::GroupTooLarge, "q exceeds 2^20");
  return group.q().get_ui();
}

inline Scalar scalar(const Group& group, std::uint64_t v) { return group.scalar(Int(static_cast<unsigned long>(v))); }

// km = (peer_y * h^(q-pass))^r straight from group operations, with no identity abort.
inline Element raw_keying_material(const Group& group, const Element& peer_y, std::uint64_t pass, std::uint64_t r) {
  const std::uint64_t q = group.q().get_ui();
  Element unmasked = group.mul(peer_y, group.power(group.h(), scalar(group, (q - pass) % q)));
  return group.power(unmasked, scalar(group, r));
}

inline Element masked(const Group& group, std::uint64_t r, std::uint64_t pass) {
  return group.mul(group.power(group.g(), scalar(group, r)), group.power(group.h(), scalar(group, pass)));
}

inline std::string tuple(std::initializer_list<std::pair<const char*, std::string>> fields) {
  std::string out = "(";
  for (const auto& [k, v] : fields) {
    if (out.size() > 1) out += ",";
    out += std::string(k) + "=" + v;
  }
  return out + ")";
}

}  // namespace detail

/// The unique a in [0, q-1] with base^a = target. Linear scan.
inline Scalar dlog_bruteforce(const Element& base, const Element& target, const Group& group) {
  const std::uint64_t q = detail::enumerable_order(group);
  Element acc = group.identity();
  for (std::uint64_t a = 0; a < q; ++a) {
    if (acc == target) return detail::scalar(group, a);
    acc = group.mul(acc, base);
  }
  throw Error(Errc::NotFound, "target not in the subgroup generated by base");
}

/// dlog_bruteforce(g, g^a) == a for every a; also records log_g(h).
inline Report dlog_check(const Group& group) {
  const std::uint64_t q = detail::enumerable_order(group);
  Report rep;
  rep.check = "dlog";
  for (std::uint64_t a = 0; a < q; ++a) {
    ++rep.cases;
    Element t = group.power(group.g(), detail::scalar(group, a));
    if (dlog_bruteforce(group.g(), t, group).value() != a) rep.fail(detail::tuple({{"a", std::to_string(a)}}));
  }
  rep.stats.emplace_back("log_g_h", dlog_bruteforce(group.g(), group.h(), group).value().get_str());
  return rep;
}

/// Matching passwords: for all r1, r2, pass in [1, q-1], km_c = km_s = g^(r1*r2 mod q).
///
/// The algebra is checked on every tuple. The Session path is also run on every
/// tuple where both y values are non-identity; the rest (y = 1, which a peer
/// rejects) are counted in identity_y.
inline Report exhaustive_km_check(const Group& group) {
  const std::uint64_t q = detail::enumerable_order(group);
  Report rep;
  rep.check = "completeness";
  std::uint64_t session_cases = 0;
  std::uint64_t identity_y = 0;
  for (std::uint64_t pass = 1; pass < q; ++pass) {
    for (std::uint64_t r1 = 1; r1 < q; ++r1) {
      for (std::uint64_t r2 = 1; r2 < q; ++r2) {
        ++rep.cases;
        const auto where = [&] {
          return detail::tuple({{"r1", std::to_string(r1)}, {"r2", std::to_string(r2)}, {"pass", std::to_string(pass)}});
        };
        const Int expected = pake::detail::powm_public(group.g().value(), Int(static_cast<unsigned long>(r1 * r2 % q)),
                                                       group.p());
        const Element y1 = detail::masked(group, r1, pass);
        const Element y2 = detail::masked(group, r2, pass);
        const Element km_c = detail::raw_keying_material(group, y2, pass, r1);
        const Element km_s = detail::raw_keying_material(group, y1, pass, r2);
        if (km_c.value() != expected || km_s.value() != expected) {
          rep.fail(where());
          continue;
        }
        if (y1.is_identity() || y2.is_identity()) {
          ++identity_y;
          continue;
        }
        ++session_cases;
        auto pw = [&] { return password_exponent_from_scalar(detail::scalar(group, pass), group); };
        Session client = Session::start(Role::Client, group, pw(), detail::scalar(group, r1));
        Session server = Session::start(Role::Server, group, pw(), detail::scalar(group, r2));
        client = std::move(client).absorb(y2.value());
        server = std::move(server).absorb(y1.value());
        const bool ok = client.phase() == Phase::Amplified && server.phase() == Phase::Amplified &&
                        client.keying_material().value() == expected && server.keying_material().value() == expected;
        if (!ok) rep.fail(where());
      }
    }
  }
  rep.stats.emplace_back("session_path", std::to_string(session_cases));
  rep.stats.emplace_back("identity_y", std::to_string(identity_y));
  return rep;
}

/// Mismatched passwords: km_c = km_s exactly when r1 + r2 = 0 (mod q).
inline Report mismatch_anomaly_census(const Group& group) {
  const std::uint64_t q = detail::enumerable_order(group);
  Report rep;
  rep.check = "mismatch";
  std::uint64_t collisions = 0;
  for (std::uint64_t pc = 1; pc < q; ++pc) {
    for (std::uint64_t ps = 1; ps < q; ++ps) {
      if (pc == ps) continue;
      for (std::uint64_t r1 = 1; r1 < q; ++r1) {
        const Element y1 = detail::masked(group, r1, pc);
        for (std::uint64_t r2 = 1; r2 < q; ++r2) {
          ++rep.cases;
          const Element y2 = detail::masked(group, r2, ps);
          const Element km_c = detail::raw_keying_material(group, y2, pc, r1);
          const Element km_s = detail::raw_keying_material(group, y1, ps, r2);
          const bool collide = km_c == km_s;
          const bool predicted = (r1 + r2) % q == 0;
          if (collide) ++collisions;
          if (collide != predicted)
            rep.fail(detail::tuple({{"pass_c", std::to_string(pc)},
                                    {"pass_s", std::to_string(ps)},
                                    {"r1", std::to_string(r1)},
                                    {"r2", std::to_string(r2)}}));
        }
      }
    }
  }
  rep.stats.emplace_back("collisions", std::to_string(collisions));
  return rep;
}

/// For each pass, r -> g^r * h^pass over r in [1, q-1] hits every element except h^pass.
inline Report masking_bijection_check(const Group& group) {
  const std::uint64_t q = detail::enumerable_order(group);
  Report rep;
  rep.check = "masking";
  std::set<Int> subgroup;
  for (std::uint64_t k = 0; k < q; ++k) subgroup.insert(group.power(group.g(), detail::scalar(group, k)).value());

  std::string excluded_list;
  for (std::uint64_t pass = 1; pass < q; ++pass) {
    ++rep.cases;
    std::set<Int> image;
    for (std::uint64_t r = 1; r < q; ++r) image.insert(detail::masked(group, r, pass).value());
    const Int excluded = group.power(group.h(), detail::scalar(group, pass)).value();
    std::set<Int> expected = subgroup;
    expected.erase(excluded);
    if (image.size() != q - 1 || image != expected)
      rep.fail(detail::tuple({{"pass", std::to_string(pass)}, {"image_size", std::to_string(image.size())}}));
    if (!excluded_list.empty()) excluded_list += ",";
    excluded_list += excluded.get_str();
  }
  rep.stats.emplace_back("image_size", std::to_string(q - 1));
  rep.stats.emplace_back("excluded", excluded_list);
  return rep;
}

/// Replays a recorded (y1, v2) against fresh server sessions. Works for any group size.
inline Report replay_experiment(const Group& group, std::uint64_t trials, RandomSource& rng) {
  Report rep;
  rep.check = "replay";
  std::uint64_t acceptances = 0;
  std::uint64_t control_accepted = 0;
  std::uint64_t reflection_rejected = 0;
  std::uint64_t honest_ok = 0;

  for (std::uint64_t t = 0; t < trials; ++t) {
    ++rep.cases;
    const Scalar pass = group.random_scalar(rng);
    // Ephemerals whose masked value is the identity are redrawn, as Session::start does.
    auto ephemeral = [&] {
      for (;;) {
        Scalar r = group.random_scalar(rng);
        if (!group.mul(group.power(group.g(), r), group.power(group.h(), pass)).is_identity()) return r;
      }
    };
    const Scalar r1 = ephemeral();
    const Scalar r2 = ephemeral();

    // Honest session, recorded by an eavesdropper.
    Session client = Session::start(Role::Client, group, password_exponent_from_scalar(pass, group), r1);
    Session server = Session::start(Role::Server, group, password_exponent_from_scalar(pass, group), r2);
    const Int y1 = client.own_y().value();
    const Int y2 = server.own_y().value();
    server = std::move(server).absorb(y1);
    client = std::move(client).absorb(y2);
    const VerifierValue v1 = server.make_verifier();
    client = std::move(client).check_verifier(v1);
    const VerifierValue v2 = client.make_verifier();
    server = std::move(server).check_verifier(v2);
    if (client.phase() == Phase::ConfirmedPeer && server.phase() == Phase::ConfirmedPeer) ++honest_ok;

    // Replay against a fresh server whose r2 differs from the recorded one.
    Scalar fresh = ephemeral();
    while (fresh == r2) fresh = ephemeral();
    Session replayed = Session::start(Role::Server, group, password_exponent_from_scalar(pass, group), fresh);
    replayed = std::move(replayed).absorb(y1);
    if (replayed.phase() == Phase::Amplified) replayed = std::move(replayed).check_verifier(v2);
    if (replayed.phase() == Phase::ConfirmedPeer) {
      ++acceptances;
      rep.fail(detail::tuple({{"trial", std::to_string(t)}, {"r2", r2.value().get_str()}, {"fresh_r2", fresh.value().get_str()}}));
    }

    // Control: same r2 reproduces the transcript, so the replay is accepted.
    Session control = Session::start(Role::Server, group, password_exponent_from_scalar(pass, group), r2);
    control = std::move(control).absorb(y1);
    if (control.phase() == Phase::Amplified) control = std::move(control).check_verifier(v2);
    if (control.phase() == Phase::ConfirmedPeer) ++control_accepted;

    // Reflection: the server's own v1 offered as v2.
    Session reflected = Session::start(Role::Server, group, password_exponent_from_scalar(pass, group), r2);
    reflected = std::move(reflected).absorb(y1);
    if (reflected.phase() == Phase::Amplified) reflected = std::move(reflected).check_verifier(v1);
    if (reflected.phase() == Phase::Failed) ++reflection_rejected;
  }

  if (honest_ok != trials) rep.fail("(honest sessions did not all confirm)");
  if (control_accepted != trials) rep.fail("(control replay with identical r2 was rejected)");
  if (reflection_rejected != trials) rep.fail("(reflected v1 accepted as v2)");
  rep.stats.emplace_back("acceptances", std::to_string(acceptances));
  rep.stats.emplace_back("control_accepted", std::to_string(control_accepted));
  rep.stats.emplace_back("reflection_rejected", std::to_string(reflection_rejected));
  return rep;
}

/// Every check above, in a fixed order. Deterministic given (group, seed).
inline std::vector<Report> run_all(const Group& group, std::uint64_t trials, std::uint64_t seed) {
  std::vector<Report> out;
  out.push_back(dlog_check(group));
  out.push_back(exhaustive_km_check(group));
  out.push_back(mismatch_anomaly_census(group));
  out.push_back(masking_bijection_check(group));
  SeededRandom rng(seed);
  out.push_back(replay_experiment(group, trials, rng));
  return out;
}

}  // namespace pake::oracle
