#include "pmod/keychain/keychain.hpp"

#include <algorithm>
#include <string>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod::keychain {

LevelKey::LevelKey(std::uint32_t level, const Material& bytes) : level_(level), bytes_(bytes) {
  if (level == 0) throw InvalidArgument("levels start at 1");
}

LevelKey::LevelKey(std::uint32_t level, ByteView bytes) : level_(level), bytes_{} {
  if (level == 0) throw InvalidArgument("levels start at 1");
  if (bytes.size() != bytes_.size()) throw InvalidArgument("level keys are 32 bytes");
  std::copy(bytes.begin(), bytes.end(), bytes_.begin());
}

LevelKey next(const LevelKey& key) { return LevelKey(key.level() + 1, sha256(key.bytes())); }

LevelKey chain_from(const LevelKey& key, std::uint32_t target_level) {
  if (target_level < key.level())
    throw InvalidArgument("cannot derive level " + std::to_string(target_level) +
                          " from level " + std::to_string(key.level()));
  LevelKey out = key;
  while (out.level() < target_level) out = next(out);
  return out;
}

LevelKey generate_root(RandomSource& rng) {
  LevelKey::Material m{};
  rng.fill(m);
  return LevelKey(1, m);
}

}  // namespace pmod::keychain
