#include <doctest.h>

#include <nlohmann/json.hpp>

#include "pmod/common/error.hpp"
#include "pmod/policy/policy_text.hpp"
#include "support/random_trees.hpp"

using namespace pmod;
using namespace pmod::policy;

TEST_CASE("parse desugars AND, OR and explicit thresholds") {
  auto t = parse_policy("A AND B");
  CHECK(t.root() == PolicyNode::gate(2, {PolicyNode::leaf("A"), PolicyNode::leaf("B")}));

  auto u = parse_policy("T(2; A, B, C)");
  CHECK(u.root() == PolicyNode::gate(2, {PolicyNode::leaf("A"), PolicyNode::leaf("B"),
                                         PolicyNode::leaf("C")}));

  auto v = parse_policy("A OR B");
  CHECK(v.root().threshold() == 1);
  CHECK(v.root().children().size() == 2);
}

TEST_CASE("AND binds tighter than OR") {
  auto expected = AccessTree(PolicyNode::gate(
      1, {PolicyNode::gate(2, {PolicyNode::leaf("A"), PolicyNode::leaf("B")}),
          PolicyNode::leaf("C")}));
  CHECK(parse_policy("A AND B OR C") == expected);
  CHECK(parse_policy("(A AND B) OR C") == expected);
  CHECK(parse_policy("  a and b   or C") ==
        AccessTree(PolicyNode::gate(1, {PolicyNode::gate(2, {PolicyNode::leaf("a"),
                                                             PolicyNode::leaf("b")}),
                                        PolicyNode::leaf("C")})));
  CHECK_FALSE(parse_policy("A AND (B OR C)") == expected);
}

TEST_CASE("node numbering is preorder with 1-based child positions implied by order") {
  auto t = parse_policy("T(2; A, T(1; B, C), D)");
  REQUIRE(t.node_count() == 6);
  CHECK(t.node(0).threshold() == 2);
  CHECK(t.node(1).attribute() == "A");
  CHECK(t.node(2).threshold() == 1);
  CHECK(t.node(3).attribute() == "B");
  CHECK(t.node(4).attribute() == "C");
  CHECK(t.node(5).attribute() == "D");
  CHECK(t.parent(3) == 2);
  CHECK(t.parent(5) == 0);
  CHECK(t.leaf_count() == 4);
}

TEST_CASE("parse errors carry positions") {
  auto position_of = [](const char* text) -> std::optional<std::size_t> {
    try {
      parse_policy(text);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::nullopt;
  };
  CHECK(position_of("T(4; A, B)") == 0u);
  CHECK(position_of("T(0; A)") == 0u);
  CHECK(position_of("T(1; )") == 5u);
  CHECK(position_of("A AND") == 5u);
  CHECK(position_of("A B") == 2u);
  CHECK(position_of("(A OR B") == 7u);
  CHECK(position_of("A & B") == 2u);
  CHECK(position_of("") == 0u);
}

TEST_CASE("a bare T is an ordinary attribute and one-child gates are allowed") {
  CHECK(parse_policy("T AND X").root().children()[0].attribute() == "T");
  auto t = parse_policy("T(1; A)");
  CHECK(t.root().children().size() == 1);
  CHECK(to_policy_string(t) == "T(1; A)");
}

TEST_CASE("satisfies picks minimal leaves with leftmost tie-break") {
  auto t = parse_policy("T(2; A, B, C)");
  auto s = satisfies(t, {"A", "C"});
  REQUIRE(s);
  CHECK(s->leaves == std::vector<std::size_t>{1, 3});
  CHECK(s->selected_children.at(0) == std::vector<std::size_t>{1, 3});

  auto u = parse_policy("(A AND B) OR C");
  auto su = satisfies(u, {"C"});
  REQUIRE(su);
  CHECK(su->leaves == std::vector<std::size_t>{4});
  CHECK(su->interior == std::vector<std::size_t>{0});

  // Leaves {A, B}: every minimal choice has two leaves, A and the inner gate
  // are the two leftmost satisfied children, and B is the inner gate's leftmost.
  auto w = parse_policy("T(2; A, T(1; B, C), D)");
  auto sw = satisfies(w, {"A", "B", "C", "D"});
  REQUIRE(sw);
  CHECK(sw->leaves == std::vector<std::size_t>{1, 3});
  CHECK(sw->interior == std::vector<std::size_t>{0, 2});
  CHECK(testing::brute_min_leaves(w, {"A", "B", "C", "D"}) == 2u);

  CHECK_FALSE(satisfies(parse_policy("A AND B"), {"A"}));
}

TEST_CASE("satisfies prefers the cheaper branch over the leftmost one") {
  auto t = parse_policy("(A AND B AND C) OR D");
  auto s = satisfies(t, {"A", "B", "C", "D"});
  REQUIRE(s);
  CHECK(s->leaf_count() == 1);
  CHECK(t.node(s->leaves[0]).attribute() == "D");
}

TEST_CASE("repeated labels are distinct leaves") {
  auto t = parse_policy("T(2; A, A, B)");
  auto s = satisfies(t, {"A"});
  REQUIRE(s);
  CHECK(s->leaves == std::vector<std::size_t>{1, 2});
}

TEST_CASE("property: satisfies agrees with brute force on presence and minimal size") {
  SeededRandom rng(2024);
  for (int i = 0; i < 300; ++i) {
    auto t = testing::random_tree(rng, 10, 6);
    AttributeSet attrs;
    for (std::size_t a = 0; a < 7; ++a)
      if (rng.uniform(2)) attrs.insert(testing::attr_name(a));
    auto s = satisfies(t, attrs);
    CAPTURE(to_policy_string(t));
    CHECK(s.has_value() == testing::brute_satisfied(t, attrs));
    auto best = testing::brute_min_leaves(t, attrs);
    CHECK(best.has_value() == s.has_value());
    if (!s) continue;
    CHECK(s->leaf_count() == *best);
    // Every selected gate has exactly k selected children, and leaves are owned.
    for (auto id : s->interior) CHECK(s->selected_children.at(id).size() == t.node(id).threshold());
    for (auto id : s->leaves) CHECK(attrs.contains(t.node(id).attribute()));
  }
}

TEST_CASE("property: monotonicity") {
  SeededRandom rng(77);
  for (int i = 0; i < 300; ++i) {
    auto t = testing::random_tree(rng, 12, 8);
    AttributeSet attrs;
    for (std::size_t a = 0; a < 8; ++a)
      if (rng.uniform(3) == 0) attrs.insert(testing::attr_name(a));
    if (!satisfies(t, attrs)) continue;
    auto bigger = attrs;
    bigger.insert(testing::attr_name(rng.uniform(10)));
    CHECK(satisfies(t, bigger).has_value());
  }
}

TEST_CASE("property: print/parse and JSON round-trips") {
  SeededRandom rng(11);
  for (int i = 0; i < 200; ++i) {
    auto t = testing::random_tree(rng, 12, 8);
    CHECK(parse_policy(to_policy_string(t)) == t);
    CHECK(tree_from_json(nlohmann::json::parse(to_canonical_json(t))) == t);
  }
  CHECK(to_canonical_json(parse_policy("A OR B")) ==
        R"({"children":[{"attribute":"A","kind":"leaf"},{"attribute":"B","kind":"leaf"}],)"
        R"("kind":"gate","threshold":1})");
}

TEST_CASE("JSON decoding rejects invalid trees") {
  CHECK_THROWS_AS(tree_from_json(nlohmann::json::parse(R"({"kind":"gate","threshold":3,)"
                                                       R"("children":[{"kind":"leaf","attribute":"A"}]})")),
                  FormatError);
  CHECK_THROWS_AS(tree_from_json(nlohmann::json::parse(R"({"kind":"leaf","attribute":""})")),
                  FormatError);
  CHECK_THROWS_AS(tree_from_json(nlohmann::json::parse(R"([1,2])")), FormatError);
}

TEST_CASE("attribute sets validate labels") {
  AttributeSet s{"b", "a", "a"};
  CHECK(s.size() == 2);
  CHECK(*s.begin() == "a");
  CHECK_THROWS_AS(AttributeSet({"has space"}), InvalidArgument);
  CHECK_THROWS_AS(PolicyNode::leaf(""), InvalidArgument);
  CHECK_THROWS_AS(PolicyNode::gate(1, {}), InvalidArgument);
}
