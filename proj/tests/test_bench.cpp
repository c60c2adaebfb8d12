#include <doctest.h>

#include <numeric>

#include "pmod/bench/bench.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/policy/policy_text.hpp"

using namespace pmod;
using namespace pmod::bench;
using policy::AttributeSet;

namespace {

const mpz_class kBigPrime("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);

ContextPtr transparent() { return PairingContext::transparent(kBigPrime); }

RunOptions counts_only() { return RunOptions{1, 8, true}; }

}  // namespace

TEST_CASE("attribute splits") {
  CHECK(near_equal_split(10, 3) == std::vector<std::size_t>{3, 3, 4});
  CHECK(near_equal_split(60, 6) == std::vector<std::size_t>(6, 10));
  CHECK(near_equal_split(11, 3) == std::vector<std::size_t>{3, 4, 4});
  CHECK_THROWS_AS(near_equal_split(2, 3), InvalidArgument);
  SeededRandom rng(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 1 + rng.uniform(9), n = k + rng.uniform(60);
    auto c = sampled_split(n, k, rng);
    CHECK(c.size() == k);
    CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == n);
    CHECK(*std::min_element(c.begin(), c.end()) >= 1);
  }
  CHECK_THROWS_AS(make_scenario(3, 10, Scheme::pmod, 1, std::vector<std::size_t>{3, 3, 3}), InvalidArgument);
}

TEST_CASE("baseline trees replicate higher levels") {
  auto one = scenario_spec(make_scenario(1, 3, Scheme::cpabe_case1));
  auto trees1 = build_baseline_trees(one);
  REQUIRE(trees1.size() == 1);
  CHECK(trees1[0] == one.levels[0].tree);

  auto spec = scenario_spec(make_scenario(3, 10, Scheme::cpabe_case1));
  auto trees = build_baseline_trees(spec);
  REQUIRE(trees.size() == 3);
  CHECK(trees[0].leaf_count() == 3);
  CHECK(trees[1].leaf_count() == 6);
  CHECK(trees[2].leaf_count() == 10);
  AttributeSet top;
  for (std::size_t j = 0; j < 3; ++j) top.insert(level_attribute(1, j));
  for (const auto& t : trees) CHECK(policy::satisfies(t, top).has_value());
  CHECK(policy::to_policy_string(trees[1]) == "(y1_0 AND y1_1 AND y1_2) OR (y2_0 AND y2_1 AND y2_2)");
}

TEST_CASE("tabulated operation counts, fixed examples") {
  auto p = run_scenario(make_scenario(1, 3, Scheme::pmod), transparent(), counts_only());
  CHECK(p.encrypt.ops.g0_ops == 7);
  CHECK(p.predicted_encrypt_g0 == 7);
  // A top user whose AND policy uses all of their attributes.
  CHECK(p.decrypt_tree_pairings == 2 * p.user_attributes);
  CHECK(p.decrypt.ops.pairings == 2 * p.user_attributes + 1);

  auto b = run_scenario(make_scenario(2, 5, Scheme::cpabe_case1, 1, std::vector<std::size_t>{2, 3}), transparent(),
                        counts_only());
  CHECK(b.encrypt.ops.g0_ops == 16);
  CHECK(b.predicted_encrypt_g0 == 16);
  CHECK(b.decrypt.ops.pairings == b.predicted_decrypt_pairings_table);  // k(2|Y_1| + 1) = 10
  CHECK(b.decrypt.ops.pairings == 10);
}

TEST_CASE("encryption counts match the formulas on 50 random scenarios") {
  SeededRandom rng(7);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 1 + rng.uniform(9);
    const std::size_t n = k + rng.uniform(61 - k);
    auto counts = sampled_split(n, k, rng);
    for (auto scheme : {Scheme::pmod, Scheme::cpabe_case1}) {
      auto s = make_scenario(k, n, scheme, 100 + t, counts);
      s.shape = t % 2 ? Shape::random : Shape::all_of;
      auto r = run_scenario(s, transparent(), counts_only());
      CAPTURE(k);
      CAPTURE(n);
      CAPTURE(scheme_name(scheme));
      CHECK(r.encrypt.ops.g0_ops == r.predicted_encrypt_g0);
      CHECK(r.encrypt.ops.g1_ops == r.predicted_encrypt_g1_per_level_total);
      CHECK(r.decrypt.ops.pairings == r.predicted_decrypt_pairings_chosen);
      if (scheme == Scheme::pmod) {
        CHECK(r.decrypt_tree_pairings == 2 * r.chosen_leaves);
        CHECK(r.decrypt_tree_pairings <= 2 * r.user_attributes);
      }
    }
  }
}

TEST_CASE("baseline and P-MOD grant the same parts") {
  auto ctx = transparent();
  SeededRandom rng(9);
  auto [pk, mk] = abe::setup(ctx, rng);
  auto s = make_scenario(4, 8, Scheme::pmod, 3);
  s.shape = Shape::random;
  auto spec = scenario_spec(s);
  SeededRandom data(4);
  auto csv = partition::write_csv(partition::generate_census(5, data));
  auto pmod_bundle = hierarchy::pmod_encrypt(pk, csv, spec, rng);
  auto base_bundle = baseline_encrypt(pk, csv, spec, rng);
  std::vector<std::string> all;
  for (std::size_t i = 0; i < s.k; ++i)
    for (std::size_t j = 0; j < s.counts[i]; ++j) all.push_back(level_attribute(i + 1, j));

  int granted = 0;
  for (int u = 0; u < 60; ++u) {
    AttributeSet attrs;
    for (const auto& a : all)
      if (rng.uniform(2)) attrs.insert(a);
    if (attrs.empty()) continue;
    auto sk = abe::keygen(mk, attrs, rng);
    auto level = hierarchy::resolve_level(pmod_bundle, attrs);
    if (!level) {
      CHECK_THROWS_AS(hierarchy::pmod_decrypt(pmod_bundle, sk), NoLevelSatisfied);
      CHECK_THROWS_AS(baseline_decrypt(base_bundle, sk), NoLevelSatisfied);
      continue;
    }
    ++granted;
    auto a = hierarchy::pmod_decrypt(pmod_bundle, sk);
    auto b = baseline_decrypt(base_bundle, sk);
    std::vector<std::uint32_t> expected;
    for (auto i = a.achieved_level; i <= s.k; ++i) expected.push_back(i);
    CHECK(b.levels == expected);
    CHECK(b.parts == a.parts);
  }
  CHECK(granted > 5);
}

TEST_CASE("storage census from serialized artifacts") {
  auto ctx = PairingContext::bls12_381();
  SeededRandom rng(5);
  auto [pk, mk] = abe::setup(ctx, rng);
  CHECK(census_public_key(abe::serialize(pk)) == abe::ElementCounts{3, 1, 0});
  CHECK(census_master_key(abe::serialize(mk)) == abe::ElementCounts{1, 0, 1});
  auto sk = abe::keygen(mk, AttributeSet{"a", "b", "c", "d"}, rng);
  CHECK(census_private_key(abe::serialize(sk)) == abe::ElementCounts{9, 0, 0});

  auto s = make_scenario(2, 4, Scheme::pmod);
  SeededRandom data(1);
  auto csv = partition::write_csv(partition::generate_census(3, data));
  auto bundle = hierarchy::pmod_encrypt(pk, csv, scenario_spec(s), rng);
  CHECK(census_bundle(hierarchy::serialize(bundle)) == abe::ElementCounts{10, 2, 0});
  // The baseline replicates level 1 into level 2: 2 * (2 + 4) + 2.
  auto base = baseline_encrypt(pk, csv, scenario_spec(s), rng);
  CHECK(census_baseline(base) == abe::ElementCounts{14, 2, 0});
}

TEST_CASE("report emission") {
  auto empty = emit_report({});
  CHECK(empty.csv ==
        "scheme,backend,k,N,y_counts,iterations,user_attributes,chosen_leaves,keygen_ms,encrypt_ms,"
        "decrypt_ms,keygen_g0,encrypt_g0,encrypt_g1,decrypt_pairings,decrypt_tree_pairings,decrypt_g1,"
        "predicted_encrypt_g0,predicted_encrypt_g1_table,predicted_encrypt_g1_per_level_total,"
        "predicted_decrypt_pairings_table,predicted_decrypt_pairings_chosen,sk_g0,ct_g0,ct_g1\n");

  auto s = make_scenario(3, 10, Scheme::pmod, 4);
  auto a = run_scenario(s, transparent(), counts_only());
  auto b = run_scenario(s, transparent(), counts_only());
  auto ea = partition::parse_csv(emit_report({a}).csv);
  auto eb = partition::parse_csv(emit_report({b}).csv);
  REQUIRE(ea.rows.size() == 1);
  for (std::size_t c = 0; c < ea.header.size(); ++c) {
    if (ea.header[c].ends_with("_ms")) continue;
    CHECK(ea.rows[0][c] == eb.rows[0][c]);
  }
  CHECK(ea.rows[0][4] == "3;3;4");
  CHECK(emit_report({a}).table.find("pmod") != std::string::npos);
}
