#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include <gmpxx.h>

#include "pmod/common/bytes.hpp"

namespace pmod {

// Source of random bytes. Implementations are not thread-safe; give each
// thread its own instance.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  // Uniform integer in [0, bound) by rejection sampling. bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  mpz_class uniform(const mpz_class& bound);
};

// Operating system entropy through OpenSSL's RAND_bytes.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Deterministic ChaCha20 keystream keyed by SHA-256 of the seed. Intended for
// tests, golden files and benchmarks.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed);
  ~SeededRandom() override;
  SeededRandom(const SeededRandom&) = delete;
  SeededRandom& operator=(const SeededRandom&) = delete;

  void fill(std::span<std::uint8_t> out) override;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace pmod
