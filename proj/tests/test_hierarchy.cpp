#include <doctest.h>
#include <sodium.h>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/hierarchy/hierarchy.hpp"

using namespace pmod;
using namespace pmod::hierarchy;
using policy::AttributeSet;

namespace {

constexpr const char* GOLDEN_BUNDLE_DIGEST =
    "3da5ae89d385f4d4174f73d9f3983107b4d43a1561ff7af97ffcb430cf79c33c";

const mpz_class kBigPrime("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);

std::string level_policy(std::size_t i) {
  return "L" + std::to_string(i) + "a AND L" + std::to_string(i) + "b";
}
AttributeSet level_user(std::size_t i) {
  return AttributeSet{"L" + std::to_string(i) + "a", "L" + std::to_string(i) + "b"};
}

HierarchySpec census_spec(std::size_t k) {
  std::vector<std::string> policies;
  for (std::size_t i = 1; i <= k; ++i) policies.push_back(level_policy(i));
  return make_spec(policies, partition::census_plan(k));
}

std::string census_csv(std::size_t rows, std::uint64_t seed) {
  SeededRandom rng(seed);
  return partition::write_csv(partition::generate_census(rows, rng));
}

// Independent per-part opening: libsodium's AES-GCM, the associated data
// assembled by hand and the chain computed with libsodium's SHA-256.
Bytes open_part_independently(const partition::EncryptedPart& ep, std::array<std::uint8_t, 32> key) {
  Bytes ad{'p', 'm', 'o', 'd', '-', 'p', 'a', 'r', 't', 1, 0, 0, 0, static_cast<std::uint8_t>(ep.level)};
  ad.insert(ad.end(), ep.plaintext_digest.begin(), ep.plaintext_digest.end());
  Bytes combined = ep.ciphertext;
  combined.insert(combined.end(), ep.tag.begin(), ep.tag.end());
  Bytes out(ep.ciphertext.size());
  unsigned long long len = 0;
  if (crypto_aead_aes256gcm_decrypt(out.data(), &len, nullptr, combined.data(), combined.size(), ad.data(),
                                    ad.size(), ep.nonce.data(), key.data()) != 0)
    throw AuthenticationFailure("independent open failed");
  out.resize(len);
  return out;
}

}  // namespace

TEST_CASE("k = 1 holder recovers the whole file") {
  auto ctx = PairingContext::transparent(kBigPrime);
  SeededRandom rng(1);
  auto [pk, mk] = abe::setup(ctx, rng);
  partition::PartitionPlan plan{partition::Mode::column_groups, {partition::Group{{"a", "b"}, {}}}};
  auto spec = make_spec({"A"}, plan);
  auto bundle = pmod_encrypt(pk, "a,b\r\n1,2\r\n", spec, rng);
  auto got = pmod_decrypt(bundle, abe::keygen(mk, AttributeSet{"A"}, rng));
  CHECK(got.achieved_level == 1);
  CHECK(to_string(got.view) == "a,b\n1,2\n");
  CHECK_THROWS_AS(pmod_decrypt(bundle, abe::keygen(mk, AttributeSet{"B"}, rng)), NoLevelSatisfied);
}

TEST_CASE("level 2 holder gets parts 2 and 3, checked against an independent opening") {
  REQUIRE(sodium_init() >= 0);
  auto ctx = PairingContext::bls12_381();
  SeededRandom rng(2);
  auto [pk, mk] = abe::setup(ctx, rng);
  const auto csv = census_csv(40, 7);
  auto spec = census_spec(3);
  keychain::LevelKey root(1, from_hex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"));
  auto bundle = pmod_encrypt_with_root(pk, csv, spec, root, rng);

  auto got = pmod_decrypt(bundle, abe::keygen(mk, level_user(2), rng));
  CHECK(got.achieved_level == 2);
  REQUIRE(got.parts.size() == 2);

  auto expected = partition::partition(csv, spec.plan);
  std::array<std::uint8_t, 32> k = root.bytes();
  std::vector<std::array<std::uint8_t, 32>> keys{k};
  for (int i = 0; i < 2; ++i) {
    crypto_hash_sha256(k.data(), k.data(), k.size());
    keys.push_back(k);
  }
  if (crypto_aead_aes256gcm_is_available()) {
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(open_part_independently(bundle.levels[i].part, keys[i]) == expected.parts[i]);
    CHECK_THROWS_AS(open_part_independently(bundle.levels[0].part, keys[1]), AuthenticationFailure);
  } else {
    MESSAGE("no hardware AES-GCM in libsodium; checking the chain only");
  }
  CHECK(got.parts[0] == expected.parts[1]);
  CHECK(got.parts[1] == expected.parts[2]);
  CHECK(keychain::chain_from(root, 3).bytes() == keys[2]);

  auto view = partition::parse_csv(to_string(got.view));
  CHECK(view.header.size() == 7);
}

TEST_CASE("encryption cost is 2 * sum |Y_i| + k group-0 operations") {
  for (std::size_t k : {3u, 6u, 9u}) {
    auto ctx = PairingContext::transparent(kBigPrime);
    SeededRandom rng(k);
    auto [pk, mk] = abe::setup(ctx, rng);
    std::vector<std::string> policies;
    std::size_t leaves = 0;
    for (std::size_t i = 1; i <= k; ++i) {
      std::string p = "x" + std::to_string(i) + "_0";
      for (std::size_t j = 1; j < i % 4 + 1; ++j) p += " OR x" + std::to_string(i) + "_" + std::to_string(j);
      leaves += i % 4 + 1;
      policies.push_back(p);
    }
    auto spec = make_spec(policies, partition::census_plan(k));
    const auto before = ctx->op_counters();
    auto bundle = pmod_encrypt(pk, census_csv(5, 1), spec, rng);
    const auto used = ctx->op_counters() - before;
    CHECK(used.g0_ops == 2 * leaves + k);
    CHECK(used.g1_ops == 2 * k);
    CHECK(used.pairings == 0);
    CHECK(count_elements(bundle) == abe::ElementCounts{2 * leaves + k, k, 0});
  }
}

TEST_CASE("level resolution and the single decryption") {
  auto ctx = PairingContext::bls12_381();
  SeededRandom rng(3);
  auto [pk, mk] = abe::setup(ctx, rng);
  auto bundle = pmod_encrypt(pk, census_csv(10, 2), census_spec(3), rng);

  auto top = abe::keygen(mk, level_user(1), rng);
  auto got = pmod_decrypt(bundle, top);
  CHECK(got.achieved_level == 1);
  CHECK(got.parts.size() == 3);
  CHECK(to_string(got.view) == census_csv(10, 2));
  // One decryption of "L1a AND L1b": two leaves, 2 * 2 + 1 pairings, and no
  // more in the chain or part decryption.
  CHECK(got.abe_ops.pairings == 5);
  CHECK(got.total_ops.pairings == got.abe_ops.pairings);
  CHECK(got.total_ops == got.abe_ops);

  AttributeSet both = level_user(3);
  for (const auto& a : level_user(1)) both.insert(a);
  CHECK(pmod_decrypt(bundle, abe::keygen(mk, both, rng)).achieved_level == 1);
  CHECK(resolve_level(bundle, both) == 1u);
  CHECK_FALSE(resolve_level(bundle, AttributeSet{"L1a", "L2b"}).has_value());
  CHECK_THROWS_AS(pmod_decrypt(bundle, abe::keygen(mk, AttributeSet{"L1a", "L2b"}, rng)), NoLevelSatisfied);

  auto other = abe::setup(PairingContext::transparent(kBigPrime), rng);
  CHECK_THROWS_AS(pmod_decrypt(bundle, abe::keygen(other.second, level_user(1), rng)), ContextMismatch);
}

TEST_CASE("downward closure across k = 3, 6, 9") {
  auto ctx = PairingContext::transparent(kBigPrime);
  for (std::size_t k : {3u, 6u, 9u}) {
    CAPTURE(k);
    SeededRandom rng(100 + k);
    auto [pk, mk] = abe::setup(ctx, rng);
    const auto csv = census_csv(12, k);
    auto spec = census_spec(k);
    auto bundle = pmod_encrypt(pk, csv, spec, rng);
    auto expected = partition::partition(csv, spec.plan);
    for (std::size_t i = 1; i <= k; ++i) {
      auto got = pmod_decrypt(bundle, abe::keygen(mk, level_user(i), rng));
      CHECK(got.achieved_level == i);
      REQUIRE(got.parts.size() == k - i + 1);
      for (std::size_t j = i; j <= k; ++j) CHECK(got.parts[j - i] == expected.parts[j - 1]);

      // Everything the user can compute: their unwrapped sk_i and its
      // descendants. None of it opens a more sensitive part.
      auto sk = abe::keygen(mk, level_user(i), rng);
      const auto& rec = bundle.levels[i - 1];
      auto z = abe::decrypt(rec.kem, sk);
      Bytes ad{'p', 'm', 'o', 'd', '-', 'w', 'r', 'a', 'p', 0, 0, 0, static_cast<std::uint8_t>(i)};
      keychain::LevelKey sk_i(static_cast<std::uint32_t>(i),
                              aead_open(wrap_key(*ctx, rec.level, z), rec.wrapped_key, ad));
      for (std::size_t j = i; j <= k; ++j) {
        auto derived = keychain::chain_from(sk_i, static_cast<std::uint32_t>(j));
        CHECK(partition::decrypt_part(bundle.levels[j - 1].part, derived) == expected.parts[j - 1]);
        for (std::size_t p = 1; p < i; ++p) {
          const auto& ep = bundle.levels[p - 1].part;
          CHECK_THROWS_AS(partition::decrypt_part(ep, keychain::LevelKey(ep.level, derived.bytes())),
                          AuthenticationFailure);
        }
      }
      // Other levels' KEMs are out of reach too.
      for (std::size_t p = 1; p < i; ++p)
        CHECK_THROWS_AS(abe::decrypt(bundle.levels[p - 1].kem, sk), PolicyNotSatisfied);
    }
  }
}

TEST_CASE("bundles serialize deterministically and validate on load") {
  auto make = [] {
    auto ctx = PairingContext::transparent(kBigPrime);
    SeededRandom rng(42);
    auto keys = abe::setup(ctx, rng);
    return pmod_encrypt(keys.first, census_csv(6, 3), census_spec(3), rng,
                        EncryptOptions{"2024-01-01T00:00:00Z"});
  };
  auto a = serialize(make());
  auto b = serialize(make());
  CHECK(a == b);
  // Frozen digest of the transparent-mode bundle; any change to an encoding,
  // the KDF or the order of random draws shows up here.
  CHECK(to_hex(sha256(a)) == GOLDEN_BUNDLE_DIGEST);

  auto back = deserialize_bundle(a);
  CHECK(serialize(back) == a);
  CHECK(back.manifest.k == 3);
  CHECK(back.manifest.created_at == "2024-01-01T00:00:00Z");
  CHECK(back.manifest.levels[1].policy == "L2a AND L2b");
  CHECK(back.manifest.spec_hash.size() == 64);

  Bytes trailing = a;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserialize_bundle(trailing), FormatError);
  Bytes magic = a;
  magic[3] = 'X';
  CHECK_THROWS_AS(deserialize_bundle(magic), FormatError);

  // A manifest that lies about the policies is caught.
  auto forged = back;
  forged.manifest.levels[0].policy = "L1a OR L1b";
  forged.manifest.spec_hash = spec_hash(forged.manifest.levels);
  CHECK_THROWS_AS(deserialize_bundle(serialize(forged)), FormatError);
  auto stale = back;
  stale.manifest.spec_hash = std::string(64, '0');
  CHECK_THROWS_AS(deserialize_bundle(serialize(stale)), FormatError);
}

TEST_CASE("corrupted parts fail authentication on decrypt") {
  auto ctx = PairingContext::transparent(kBigPrime);
  SeededRandom rng(5);
  auto [pk, mk] = abe::setup(ctx, rng);
  auto bundle = pmod_encrypt(pk, census_csv(6, 3), census_spec(3), rng);
  bundle.levels[2].part.ciphertext[0] ^= 0x80;
  CHECK_THROWS_AS(pmod_decrypt(bundle, abe::keygen(mk, level_user(2), rng)), AuthenticationFailure);
  bundle.levels[2].part.ciphertext[0] ^= 0x80;
  bundle.levels[1].wrapped_key.tag[0] ^= 1;
  CHECK_THROWS_AS(pmod_decrypt(bundle, abe::keygen(mk, level_user(2), rng)), AuthenticationFailure);
  CHECK(pmod_decrypt(bundle, abe::keygen(mk, level_user(3), rng)).achieved_level == 3);
}

TEST_CASE("storage census: k = 2, |Y| = (2, 2)") {
  auto ctx = PairingContext::bls12_381();
  SeededRandom rng(6);
  auto [pk, mk] = abe::setup(ctx, rng);
  partition::PartitionPlan plan{partition::Mode::column_groups,
                                {partition::Group{{"a"}, {}}, partition::Group{{"b"}, {}}}};
  auto bundle = pmod_encrypt(pk, "a,b\n1,2\n", make_spec({"A AND B", "C OR D"}, plan), rng);
  auto loaded = deserialize_bundle(serialize(bundle));
  CHECK(count_elements(loaded) == abe::ElementCounts{10, 2, 0});
}

TEST_CASE("spec parsing") {
  const std::string good = R"({"levels":[{"index":1,"policy":"A AND B","label":"exec"},
                                         {"index":2,"policy":"C","label":"staff"}],
                              "partition":{"mode":"column_groups","groups":[["a"],["b"]]}})";
  auto spec = parse_spec(good);
  CHECK(spec.k() == 2);
  CHECK(spec.levels[0].label == "exec");
  CHECK(spec.levels[0].tree.leaf_count() == 2);
  CHECK(parse_spec(spec_to_json(spec)).levels[1].policy == "C");

  CHECK_THROWS_AS(parse_spec(R"({"levels":[{"index":2,"policy":"A"}],
                               "partition":{"mode":"column_groups","groups":[["a"]]}})"),
                  FormatError);
  CHECK_THROWS_AS(parse_spec(R"({"levels":[{"index":1,"policy":"A"}],
                               "partition":{"mode":"column_groups","groups":[["a"],["b"]]}})"),
                  FormatError);
  CHECK_THROWS_AS(parse_spec(R"({"levels":[{"index":1,"policy":"A AND"}],
                               "partition":{"mode":"column_groups","groups":[["a"]]}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_spec("levels = []"), FormatError);
}
