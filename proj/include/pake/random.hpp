#pragma once

#include <openssl/rand.h>

#include <cstdint>
#include <random>
#include <span>

#include "pake/error.hpp"

namespace pake {

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Operating-system CSPRNG via libcrypto.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
      throw Error(Errc::RngFailure, "RAND_bytes failed");
  }
};

/// Deterministic source for tests and toy-group demos. Not for real keys.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}

  void fill(std::span<std::uint8_t> out) override {
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t word = engine_();
      for (int b = 0; b < 8 && i < out.size(); ++b, ++i) out[i] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pake
