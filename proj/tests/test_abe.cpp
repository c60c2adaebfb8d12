#include <doctest.h>

#include "pmod/abe/abe.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/crypto.hpp"
#include "pmod/common/random.hpp"
#include "pmod/policy/policy_text.hpp"
#include "support/random_trees.hpp"

using namespace pmod;
using namespace pmod::abe;
using policy::AttributeSet;
using policy::parse_policy;

namespace {

const mpz_class kBigPrime("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);

std::vector<ContextPtr> both_backends() {
  return {PairingContext::transparent(kBigPrime), PairingContext::bls12_381()};
}

std::uint64_t exponent(const PairingContext& ctx, const G0Element& x) {
  return ctx.known_exponent(x).value().value().get_ui();
}
std::uint64_t exponent(const PairingContext& ctx, const G1Element& x) {
  return ctx.known_exponent(x).value().value().get_ui();
}

// alpha = 7, beta = 11, r = 5, r_A = 2 over Z_101.
struct SmallFixture {
  ContextPtr ctx = PairingContext::transparent(101);
  const ScalarField& F = ctx->field();
  std::pair<PublicKey, MasterKey> keys = setup_with(ctx, F.from_u64(7), F.from_u64(11));
  PrivateKey sk = keygen_with(keys.second, AttributeSet{"A"}, KeyRandomness{F.from_u64(5), {{"A", F.from_u64(2)}}});

  G1Element egg_pow(std::uint64_t e) const {
    return ctx->exp(ctx->pair(ctx->generator(), ctx->generator()), F.from_u64(e));
  }
};

}  // namespace

TEST_CASE("hand-computed key and ciphertext exponents over Z_101") {
  SmallFixture f;
  const auto& [pk, mk] = f.keys;
  CHECK(exponent(*f.ctx, pk.B) == 11);
  CHECK(exponent(*f.ctx, pk.B_inv) == 46);
  CHECK(exponent(*f.ctx, pk.egg_alpha) == 7);
  // (7 + 5) / 11 = 12 * 46 = 47
  CHECK(exponent(*f.ctx, f.sk.D) == 47);
  CHECK(exponent(*f.ctx, f.sk.components.at("A").D_prime) == 2);
  // 5 + h(A) * 2 with h(A) = 84
  CHECK(exponent(*f.ctx, f.sk.components.at("A").D) == 72);

  auto tree = parse_policy("A");
  SharePlan plan(f.F, {{f.F.from_u64(9)}});
  auto m = f.egg_pow(5);
  auto ct = encrypt_with_plan(pk, m, tree, plan);
  CHECK(exponent(*f.ctx, ct.C) == 99);
  CHECK(exponent(*f.ctx, ct.C_tilde) == (5 + 63) % 101);
  CHECK(exponent(*f.ctx, ct.leaves.at(0).C) == 9);
  CHECK(exponent(*f.ctx, ct.leaves.at(0).C_prime) == 49);

  auto sel = policy::satisfies(tree, f.sk.attributes);
  REQUIRE(sel);
  auto leaf = decrypt_node(ct, f.sk, 0, *sel);
  REQUIRE(leaf);
  CHECK(exponent(*f.ctx, *leaf) == 45);  // r * s
  CHECK(exponent(*f.ctx, f.ctx->pair(ct.C, f.sk.D)) == 7);
  CHECK(decrypt(ct, f.sk) == m);
}

TEST_CASE("lagrange coefficients at zero") {
  auto ctx = PairingContext::transparent(101);
  const auto& F = ctx->field();
  std::vector<Scalar> two{F.from_u64(1), F.from_u64(2)};
  std::vector<Scalar> three{F.from_u64(1), F.from_u64(2), F.from_u64(3)};
  CHECK(lagrange_coefficient(F, F.from_u64(1), two, F.zero()).value() == 2);
  CHECK(lagrange_coefficient(F, F.from_u64(2), two, F.zero()).value() == 100);
  CHECK(lagrange_coefficient(F, F.from_u64(2), three, F.zero()).value() == 98);
  CHECK_THROWS_AS(lagrange_coefficient(F, F.from_u64(4), three, F.zero()), InvalidArgument);
  std::vector<Scalar> dup{F.from_u64(1), F.from_u64(1)};
  CHECK_THROWS_AS(lagrange_coefficient(F, F.from_u64(1), dup, F.zero()), InvalidArgument);
}

TEST_CASE("share plans reconstruct every gate from any k children") {
  auto ctx = PairingContext::transparent(kBigPrime);
  const auto& F = ctx->field();
  SeededRandom rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto tree = testing::random_tree(rng, 8, 5);
    Scalar s = F.random(rng);
    auto plan = share_secret(F, tree, s, rng);
    CHECK(plan.constant_term(0) == s);
    for (std::size_t id = 0; id < tree.node_count(); ++id) {
      const auto& n = tree.node(id);
      CHECK(plan.polynomial(id).size() == n.threshold());
      if (n.is_leaf()) continue;
      // The last k children, so the choice differs from the leftmost default.
      std::vector<Scalar> idx;
      for (std::size_t c = n.children().size() - n.threshold(); c < n.children().size(); ++c)
        idx.push_back(F.from_u64(c + 1));
      Scalar acc = F.zero();
      for (const auto& i : idx) {
        const auto child = n.children()[i.value().get_ui() - 1].id();
        acc = F.add(acc, F.mul(plan.constant_term(child), lagrange_coefficient(F, i, idx, F.zero())));
      }
      CHECK(acc == plan.constant_term(id));
    }
  }
}

TEST_CASE("round trip on random trees, both backends") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    SeededRandom rng(2024);
    auto [pk, mk] = setup(ctx, rng);
    const int trials = ctx->kind() == BackendKind::bls12_381 ? 40 : 200;
    for (int t = 0; t < trials; ++t) {
      auto tree = testing::random_tree(rng, 6, 6);
      auto attrs = testing::random_satisfying_set(rng, tree);
      auto sk = keygen(mk, attrs, rng);
      auto m = ctx->random_g1(rng);
      auto ct = encrypt(pk, m, tree, rng);
      auto trace = decrypt_traced(ct, sk);
      CHECK(trace.message == m);
      const auto L = trace.selection.leaf_count();
      CHECK(trace.tree_ops.pairings == 2 * L);
      CHECK(trace.total_ops.pairings == 2 * L + 1);

      auto bad = testing::random_unsatisfying_set(rng, tree);
      if (bad && !bad->empty()) {
        auto sk_bad = keygen(mk, *bad, rng);
        CHECK_THROWS_AS(decrypt(ct, sk_bad), PolicyNotSatisfied);
      }
    }
  }
}

TEST_CASE("encryption and keygen operation counts") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    SeededRandom rng(5);
    auto [pk, mk] = setup(ctx, rng);
    auto tree = parse_policy("T(2; A, B AND C, D) OR E");
    auto m = ctx->random_g1(rng);
    auto before = ctx->op_counters();
    auto ct = encrypt(pk, m, tree, rng);
    auto used = ctx->op_counters() - before;
    CHECK(used.g0_ops == 2 * tree.leaf_count() + 1);
    CHECK(used.g1_ops == 2);
    CHECK(used.pairings == 0);
    CHECK(count_elements(ct) == ElementCounts{2 * tree.leaf_count() + 1, 1, 0});

    AttributeSet attrs{"A", "B", "C"};
    before = ctx->op_counters();
    auto sk = keygen(mk, attrs, rng);
    used = ctx->op_counters() - before;
    // g^r, D (mul + exp), then per attribute an exp, a mul and g^{r_u}.
    CHECK(used.g0_ops == 3 + 3 * attrs.size());
    CHECK(count_elements(sk) == ElementCounts{1 + 2 * attrs.size(), 0, 0});
    CHECK(count_elements(pk) == ElementCounts{3, 1, 0});
    CHECK(count_elements(mk) == ElementCounts{1, 0, 1});
  }
}

TEST_CASE("a hybrid key built from two users does not decrypt") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    SeededRandom rng(77);
    auto [pk, mk] = setup(ctx, rng);
    auto tree = parse_policy("A AND B");
    auto m = ctx->random_g1(rng);
    auto ct = encrypt(pk, m, tree, rng);
    auto alice = keygen(mk, AttributeSet{"A"}, rng);
    auto bob = keygen(mk, AttributeSet{"B"}, rng);
    CHECK_THROWS_AS(decrypt(ct, alice), PolicyNotSatisfied);
    CHECK_THROWS_AS(decrypt(ct, bob), PolicyNotSatisfied);

    for (const auto* base : {&alice, &bob}) {
      PrivateKey hybrid = *base;
      hybrid.components = {{"A", alice.components.at("A")}, {"B", bob.components.at("B")}};
      hybrid.attributes = AttributeSet{"A", "B"};
      CHECK_FALSE(decrypt(ct, hybrid) == m);
    }
    auto carol = keygen(mk, AttributeSet{"A", "B"}, rng);
    CHECK(decrypt(ct, carol) == m);
  }
}

TEST_CASE("identity message and edge cases") {
  auto ctx = PairingContext::bls12_381();
  SeededRandom rng(3);
  auto [pk, mk] = setup(ctx, rng);
  auto tree = parse_policy("A OR B");
  auto ct = encrypt(pk, ctx->g1_identity(), tree, rng);
  auto sk = keygen(mk, AttributeSet{"B"}, rng);
  CHECK(ctx->is_identity(decrypt(ct, sk)));
  CHECK_THROWS_AS(keygen(mk, AttributeSet{}, rng), InvalidArgument);
  CHECK_THROWS_AS(setup_with(ctx, ctx->field().one(), ctx->field().zero()), InvalidArgument);

  AbeCiphertext broken = ct;
  broken.leaves.erase(broken.leaves.begin());
  CHECK_THROWS_AS(decrypt(broken, sk), FormatError);
}

TEST_CASE("frozen encodings over Z_101") {
  SmallFixture f;
  const auto& pk = f.keys.first;
  CHECK(to_hex(serialize(pk)) ==
        "504d4f4401010000000f7472616e73706172656e743a3130310200000020"
        "0000000000000000000000000000000000000000000000000000000000000001"
        "0200000020000000000000000000000000000000000000000000000000000000000000000b"
        "0200000020000000000000000000000000000000000000000000000000000000000000002e"
        "02000000200000000000000000000000000000000000000000000000000000000000000007");
  auto ct = encrypt_with_plan(pk, f.egg_pow(5), parse_policy("A"), SharePlan(f.F, {{f.F.from_u64(9)}}));
  auto bytes = serialize(ct);
  CHECK(to_hex(sha256(bytes)) == "c42e8523136942299569fe6b1461e7a3dfa4dad420a31ce47a73d78d92651e98");
  CHECK(encoded_backend_id(bytes) == "transparent:101");
}

TEST_CASE("serialization round trips and rejects damage") {
  for (const auto& ctx : both_backends()) {
    CAPTURE(ctx->backend_id());
    SeededRandom rng(9);
    auto [pk, mk] = setup(ctx, rng);
    auto sk = keygen(mk, AttributeSet{"A", "B"}, rng);
    auto tree = parse_policy("T(2; A, B, C)");
    auto m = ctx->random_g1(rng);
    auto ct = encrypt(pk, m, tree, rng);

    auto pk2 = deserialize_public_key(serialize(pk));
    auto mk2 = deserialize_master_key(serialize(mk));
    auto sk2 = deserialize_private_key(serialize(sk));
    auto ct2 = deserialize_ciphertext(ctx, serialize(ct));
    CHECK(serialize(pk2) == serialize(pk));
    CHECK(serialize(mk2) == serialize(mk));
    CHECK(serialize(sk2) == serialize(sk));
    CHECK(serialize(ct2) == serialize(ct));
    CHECK(decrypt(ct2, sk2) == m);
    CHECK(decrypt(encrypt(pk2, m, tree, rng), keygen(mk2, AttributeSet{"B", "C"}, rng)) == m);

    auto bytes = serialize(ct);
    Bytes truncated(bytes.begin(), bytes.end() - 1);
    CHECK_THROWS_AS(deserialize_ciphertext(ctx, truncated), FormatError);
    Bytes trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(deserialize_ciphertext(ctx, trailing), FormatError);
    Bytes magic = bytes;
    magic[0] ^= 1;
    CHECK_THROWS_AS(deserialize_ciphertext(ctx, magic), FormatError);
    CHECK_THROWS_AS(deserialize_public_key(serialize(sk)), FormatError);

    auto other = ctx->kind() == BackendKind::bls12_381 ? PairingContext::transparent(kBigPrime)
                                                       : PairingContext::bls12_381();
    CHECK_THROWS_AS(deserialize_ciphertext(other, bytes), ContextMismatch);
  }
}
