#include <doctest.h>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/group/pairing_context.hpp"

using namespace pmod;

namespace {

const mpz_class kBigPrime("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);

std::vector<ContextPtr> both_backends() {
  return {PairingContext::transparent(kBigPrime), PairingContext::bls12_381()};
}

}  // namespace

TEST_CASE("random_scalar stays in range and replays under a fixed seed") {
  auto ctx = PairingContext::transparent(101);
  SeededRandom a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    Scalar x = ctx->random_scalar(a);
    CHECK(x.value() >= 0);
    CHECK(x.value() < 101);
    CHECK(x == ctx->random_scalar(b));
    differs |= !(x == ctx->random_scalar(c));
  }
  CHECK(differs);
}

TEST_CASE("transparent pairing multiplies exponents") {
  auto ctx = PairingContext::transparent(101);
  const auto& F = ctx->field();
  const auto& g = ctx->generator();
  auto e = ctx->pair(ctx->exp(g, F.from_u64(99)), ctx->exp(g, F.from_u64(47)));
  REQUIRE(ctx->known_exponent(e).has_value());
  CHECK(ctx->known_exponent(e)->value() == 7);
}

TEST_CASE("pairing identities on both backends") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    const auto& F = ctx->field();
    const auto& g = ctx->generator();
    auto egg = ctx->pair(g, g);
    CHECK_FALSE(ctx->is_identity(egg));
    CHECK(ctx->pair(ctx->exp(g, F.from_u64(2)), ctx->exp(g, F.from_u64(3))) ==
          ctx->exp(egg, F.from_u64(6)));
    CHECK(ctx->is_identity(ctx->pair(ctx->exp(g, F.zero()), ctx->exp(g, F.from_u64(5)))));
  }
}

TEST_CASE("bilinearity and symmetry, 100 random pairs per backend") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    const auto& F = ctx->field();
    const auto& g = ctx->generator();
    const auto egg = ctx->pair(g, g);
    SeededRandom rng(42);
    for (int i = 0; i < 100; ++i) {
      Scalar a = F.random(rng), b = F.random(rng);
      auto ga = ctx->exp(g, a), gb = ctx->exp(g, b);
      auto lhs = ctx->pair(ga, gb);
      CHECK(lhs == ctx->exp(egg, F.mul(a, b)));
      CHECK(lhs == ctx->pair(gb, ga));
    }
  }
}

TEST_CASE("hashed elements pair correctly against generator-derived ones") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    const auto& F = ctx->field();
    const auto& g = ctx->generator();
    SeededRandom rng(5);
    Scalar a = F.random(rng), b = F.random(rng);
    auto h = ctx->hash_to_g0("attribute");
    // e(g^a, h^b) = e(g^b, h^a) = e(g, h)^{ab}
    auto x = ctx->pair(ctx->exp(g, a), ctx->exp(h, b));
    CHECK(x == ctx->pair(ctx->exp(h, a), ctx->exp(g, b)));
    CHECK(x == ctx->exp(ctx->pair(g, h), F.mul(a, b)));
    // g^a * h^b paired with g^c
    Scalar c = F.random(rng);
    auto lhs = ctx->pair(ctx->mul(ctx->exp(g, a), ctx->exp(h, b)), ctx->exp(g, c));
    auto rhs = ctx->mul(ctx->exp(ctx->pair(g, g), F.mul(a, c)),
                        ctx->exp(ctx->pair(g, h), F.mul(b, c)));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("two hashed elements cannot be paired on the curve backend") {
  auto ctx = PairingContext::bls12_381();
  CHECK_THROWS_AS(ctx->pair(ctx->hash_to_g0("A"), ctx->hash_to_g0("B")), InvalidArgument);
}

TEST_CASE("hash_to_g0 is deterministic and matches SHA-256 mod p in transparent mode") {
  auto ctx = PairingContext::transparent(101);
  CHECK(ctx->hash_to_g0("A") == ctx->hash_to_g0("A"));
  CHECK_FALSE(ctx->hash_to_g0("A") == ctx->hash_to_g0("B"));
  // SHA-256 digests reduced mod 101, computed with Python's hashlib.
  CHECK(ctx->known_exponent(ctx->hash_to_g0("A"))->value() == 84);
  CHECK(ctx->known_exponent(ctx->hash_to_g0("B"))->value() == 97);
  CHECK(ctx->known_exponent(ctx->hash_to_g0("C"))->value() == 65);

  auto curve = PairingContext::bls12_381();
  CHECK(curve->hash_to_g0("A") == curve->hash_to_g0("A"));
  CHECK_FALSE(curve->hash_to_g0("A") == curve->hash_to_g0("B"));
  CHECK_FALSE(curve->known_exponent(curve->hash_to_g0("A")).has_value());
}

TEST_CASE("op counters follow the counting convention") {
  auto ctx = PairingContext::transparent(101);
  const auto& F = ctx->field();
  const auto& g = ctx->generator();
  auto gb = ctx->exp(g, F.from_u64(3));

  ctx->reset_op_counters();
  ctx->pair(g, g);
  CHECK(ctx->op_counters() == OpCounts{0, 0, 1});

  ctx->reset_op_counters();
  auto ga = ctx->exp(g, F.from_u64(2));
  ctx->mul(ga, gb);
  CHECK(ctx->op_counters() == OpCounts{2, 0, 0});

  ctx->reset_op_counters();
  ctx->hash_to_g0("A");
  SeededRandom rng(1);
  ctx->random_g1(rng);
  CHECK(ctx->op_counters() == OpCounts{0, 0, 0});
}

TEST_CASE("element encodings round-trip and reject foreign backends") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    SeededRandom rng(9);
    auto x = ctx->exp(ctx->generator(), ctx->random_scalar(rng));
    auto h = ctx->exp(ctx->hash_to_g0("A"), ctx->random_scalar(rng));
    auto t = ctx->random_g1(rng);
    CHECK(ctx->deserialize_g0(ctx->serialize(x)) == x);
    CHECK(ctx->deserialize_g0(ctx->serialize(h)) == h);
    CHECK(ctx->deserialize_g1(ctx->serialize(t)) == t);
    // Pairing still works after a round trip, so both representations survive.
    auto x2 = ctx->deserialize_g0(ctx->serialize(x));
    CHECK(ctx->pair(x2, h) == ctx->pair(x, h));
  }
  auto a = PairingContext::transparent(101);
  auto b = PairingContext::bls12_381();
  CHECK_THROWS_AS(b->deserialize_g0(a->serialize(a->generator())), ContextMismatch);
  CHECK_THROWS_AS(a->pair(a->generator(), b->generator()), ContextMismatch);

  auto bad = b->serialize(b->generator());
  bad[10] ^= 0x40;
  CHECK_THROWS_AS(b->deserialize_g0(bad), FormatError);
}

TEST_CASE("contexts are interned by parameters") {
  CHECK(PairingContext::transparent(101) == PairingContext::transparent(101));
  CHECK(PairingContext::bls12_381() == PairingContext::from_backend_id("bls12-381"));
  CHECK(PairingContext::from_backend_id("transparent:101") == PairingContext::transparent(101));
  CHECK_THROWS_AS(PairingContext::transparent(100), InvalidArgument);
  CHECK_THROWS_AS(PairingContext::from_backend_id("bn254"), FormatError);
}

TEST_CASE("scalar field arithmetic") {
  ScalarField F(101);
  CHECK(F.inv(F.from_u64(11)).value() == 46);
  CHECK(F.from_i64(-3).value() == 98);
  CHECK(F.mul(F.from_u64(12), F.from_u64(46)).value() == 47);
  CHECK_THROWS_AS(F.inv(F.zero()), InvalidArgument);
  auto bytes = F.from_u64(100).to_bytes();
  CHECK(bytes[31] == 100);
  CHECK(F.from_bytes(bytes) == F.from_u64(100));
  bytes[31] = 101;
  CHECK_THROWS_AS(F.from_bytes(bytes), FormatError);
}
