#pragma once

#include <array>
#include <cstdint>

#include "pmod/common/bytes.hpp"

namespace pmod {
class RandomSource;
}

namespace pmod::keychain {

// Symmetric key protecting the part at one level. Level 1 is the most
// privileged; every later key is derived from it.
class LevelKey {
 public:
  using Material = std::array<std::uint8_t, 32>;

  // Throws InvalidArgument when level is 0.
  LevelKey(std::uint32_t level, const Material& bytes);
  LevelKey(std::uint32_t level, ByteView bytes);

  std::uint32_t level() const { return level_; }
  const Material& bytes() const { return bytes_; }

  friend bool operator==(const LevelKey&, const LevelKey&) = default;

 private:
  std::uint32_t level_;
  Material bytes_;
};

// Applies SHA-256 (target_level - key.level()) times. Deriving upward is
// impossible by design and throws InvalidArgument.
LevelKey chain_from(const LevelKey& key, std::uint32_t target_level);

// One hash step: key at level i to key at level i + 1.
LevelKey next(const LevelKey& key);

// Fresh top-level key from 32 random bytes.
LevelKey generate_root(RandomSource& rng);

}  // namespace pmod::keychain
