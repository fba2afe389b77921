#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pake {

enum class Errc {
  NotPrime,
  OrderMismatch,
  BadGenerator,
  GeneratorsEqual,
  ParamsMismatch,
  OutOfRange,
  NotInSubgroup,
  IdentityElement,
  BadLength,
  DerivationFailed,
  RngFailure,
  EmptyPassword,
  WrongPhase,
  IdentityKeyingMaterial,
  VerificationFailed,
  CommitmentMismatch,
  PayloadTooLong,
  BadVersion,
  UnknownType,
  LengthMismatch,
  Truncated,
  GroupTooLarge,
  NotFound,
  ParamFile,
  UnknownParamSet,
  Aborted,
};

constexpr std::string_view to_string(Errc c) noexcept {
  switch (c) {
    case Errc::NotPrime: return "NotPrime";
    case Errc::OrderMismatch: return "OrderMismatch";
    case Errc::BadGenerator: return "BadGenerator";
    case Errc::GeneratorsEqual: return "GeneratorsEqual";
    case Errc::ParamsMismatch: return "ParamsMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NotInSubgroup: return "NotInSubgroup";
    case Errc::IdentityElement: return "IdentityElement";
    case Errc::BadLength: return "BadLength";
    case Errc::DerivationFailed: return "DerivationFailed";
    case Errc::RngFailure: return "RngFailure";
    case Errc::EmptyPassword: return "EmptyPassword";
    case Errc::WrongPhase: return "WrongPhase";
    case Errc::IdentityKeyingMaterial: return "IdentityKeyingMaterial";
    case Errc::VerificationFailed: return "VerificationFailed";
    case Errc::CommitmentMismatch: return "CommitmentMismatch";
    case Errc::PayloadTooLong: return "PayloadTooLong";
    case Errc::BadVersion: return "BadVersion";
    case Errc::UnknownType: return "UnknownType";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::Truncated: return "Truncated";
    case Errc::GroupTooLarge: return "GroupTooLarge";
    case Errc::NotFound: return "NotFound";
    case Errc::ParamFile: return "ParamFile";
    case Errc::UnknownParamSet: return "UnknownParamSet";
    case Errc::Aborted: return "Aborted";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct Violation {
  Errc code;
  std::string detail;
};

/// Raised by validate_params; carries every violated invariant, not just the first.
class ParamsError : public Error {
 public:
  explicit ParamsError(std::vector<Violation> violations)
      : Error(violations.front().code, join(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

  bool has(Errc c) const noexcept {
    for (const auto& v : violations_)
      if (v.code == c) return true;
    return false;
  }

 private:
  static std::string join(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(v.code)) + " (" + v.detail + ")";
    }
    return out;
  }

  std::vector<Violation> violations_;
};

}  // namespace pake
