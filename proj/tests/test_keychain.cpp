#include <doctest.h>
#include <sodium.h>

#include <set>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/keychain/keychain.hpp"

using namespace pmod;
using keychain::LevelKey;

namespace {

// libsodium's SHA-256 serves as the independent reference.
LevelKey::Material reference_chain(LevelKey::Material x, unsigned steps) {
  for (unsigned i = 0; i < steps; ++i) crypto_hash_sha256(x.data(), x.data(), x.size());
  return x;
}

}  // namespace

TEST_CASE("frozen chain from the all-zero key") {
  LevelKey root(1, LevelKey::Material{});
  CHECK(to_hex(keychain::chain_from(root, 2).bytes()) ==
        "66687aadf862bd776c8fc18b8e9f8e20089714856ee233b3902a591d0d5f2925");
  CHECK(to_hex(keychain::chain_from(root, 3).bytes()) ==
        "2b32db6c2c0a6235fb1397e8225ea85e0f0e6e8c7b126d0016ccbde0e667151e");
  CHECK(to_hex(keychain::chain_from(root, 4).bytes()) ==
        "12771355e46cd47c71ed1721fd5319b383cca3a1f9fce3aa1c8cd3bd37af20d7");
  CHECK(keychain::chain_from(root, 4).level() == 4);
}

TEST_CASE("chain agrees with the reference and composes, 1000 roots") {
  REQUIRE(sodium_init() >= 0);
  SeededRandom rng(8);
  for (int t = 0; t < 1000; ++t) {
    auto root = keychain::generate_root(rng);
    const auto i = 1 + static_cast<std::uint32_t>(rng.uniform(5));
    const auto a = static_cast<std::uint32_t>(rng.uniform(6));
    const auto b = static_cast<std::uint32_t>(rng.uniform(6));
    LevelKey start = keychain::chain_from(root, i);
    auto direct = keychain::chain_from(start, i + a + b);
    CHECK(direct == keychain::chain_from(keychain::chain_from(start, i + a), i + a + b));
    CHECK(direct.bytes() == reference_chain(start.bytes(), a + b));
    CHECK(keychain::chain_from(start, i) == start);
  }
}

TEST_CASE("upward derivation is refused") {
  LevelKey k3(3, LevelKey::Material{});
  CHECK(keychain::chain_from(k3, 3) == k3);
  CHECK_THROWS_AS(keychain::chain_from(k3, 2), InvalidArgument);
  CHECK_THROWS_AS(LevelKey(0, LevelKey::Material{}), InvalidArgument);
  CHECK_THROWS_AS(LevelKey(1, Bytes(31)), InvalidArgument);
}

TEST_CASE("roots: reproducible per seed, distinct across seeds, chains distinct") {
  SeededRandom a(1), b(1), c(2);
  auto ka = keychain::generate_root(a);
  CHECK(ka == keychain::generate_root(b));
  CHECK_FALSE(ka == keychain::generate_root(c));
  CHECK(ka.level() == 1);
  CHECK(ka.bytes().size() == 32);

  SystemRandom sys;
  for (int t = 0; t < 50; ++t) {
    auto k = keychain::generate_root(sys);
    std::set<LevelKey::Material> seen;
    for (std::uint32_t level = 1; level <= 10; ++level) seen.insert(keychain::chain_from(k, level).bytes());
    CHECK(seen.size() == 10);
  }
}
