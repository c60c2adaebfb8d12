#pragma once

// Random access trees, attribute sets and brute-force oracles for tests.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pmod/common/random.hpp"
#include "pmod/policy/access_tree.hpp"

namespace pmod::testing {

inline std::string attr_name(std::size_t i) { return "a" + std::to_string(i); }

inline policy::PolicyNode random_node(RandomSource& rng, std::size_t budget, std::size_t alphabet) {
  if (budget <= 1 || rng.uniform(10) < 3)
    return policy::PolicyNode::leaf(attr_name(rng.uniform(alphabet)));
  const std::size_t arity = 1 + rng.uniform(std::min<std::size_t>(4, budget));
  // Split between arity and budget leaves over the children, at least one each.
  std::size_t total = arity + rng.uniform(budget - arity + 1);
  std::vector<std::size_t> shares(arity, 1);
  for (std::size_t extra = total - arity; extra > 0; --extra) ++shares[rng.uniform(arity)];
  std::vector<policy::PolicyNode> children;
  for (auto s : shares) children.push_back(random_node(rng, s, alphabet));
  const std::size_t k = 1 + rng.uniform(arity);
  return policy::PolicyNode::gate(k, std::move(children));
}

inline policy::AccessTree random_tree(RandomSource& rng, std::size_t max_leaves,
                                      std::size_t alphabet) {
  return policy::AccessTree(random_node(rng, max_leaves, alphabet));
}

inline std::vector<std::string> tree_attributes(const policy::AccessTree& t) {
  std::vector<std::string> out;
  for (auto* leaf : t.leaves()) out.push_back(leaf->attribute());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Plain threshold evaluation where a leaf is true iff leaf_true(leaf).
inline bool evaluate(const policy::PolicyNode& n,
                     const std::function<bool(const policy::PolicyNode&)>& leaf_true) {
  if (n.is_leaf()) return leaf_true(n);
  std::size_t ok = 0;
  for (const auto& c : n.children()) ok += evaluate(c, leaf_true) ? 1 : 0;
  return ok >= n.threshold();
}

inline bool brute_satisfied(const policy::AccessTree& t, const policy::AttributeSet& attrs) {
  return evaluate(t.root(), [&](const policy::PolicyNode& l) { return attrs.contains(l.attribute()); });
}

// Fewest leaves whose attributes the holder owns that alone satisfy the tree,
// by enumerating every subset of leaves.
inline std::optional<std::size_t> brute_min_leaves(const policy::AccessTree& t,
                                                   const policy::AttributeSet& attrs) {
  const auto n = t.leaf_count();
  std::optional<std::size_t> best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool owned = true;
    for (std::size_t i = 0; i < n && owned; ++i)
      if ((mask >> i & 1u) && !attrs.contains(t.leaves()[i]->attribute())) owned = false;
    if (!owned) continue;
    const auto bits = static_cast<std::size_t>(std::popcount(mask));
    if (best && bits >= *best) continue;
    auto in_mask = [&](const policy::PolicyNode& l) {
      for (std::size_t i = 0; i < n; ++i)
        if (t.leaves()[i] == &l) return (mask >> i & 1u) != 0;
      return false;
    };
    if (evaluate(t.root(), in_mask)) best = bits;
  }
  return best;
}

// Random subset of the tree's attributes that satisfies it.
inline policy::AttributeSet random_satisfying_set(RandomSource& rng, const policy::AccessTree& t) {
  auto attrs = tree_attributes(t);
  policy::AttributeSet current(attrs);
  for (std::size_t round = 0; round < attrs.size(); ++round) {
    if (rng.uniform(3) == 0) break;
    const auto& victim = attrs[rng.uniform(attrs.size())];
    std::vector<std::string> keep;
    for (const auto& a : current)
      if (a != victim) keep.push_back(a);
    policy::AttributeSet candidate(keep);
    if (!candidate.empty() && brute_satisfied(t, candidate)) current = candidate;
  }
  return current;
}

// Random subset of the tree's attributes (plus decoys) that does not satisfy it.
inline std::optional<policy::AttributeSet> random_unsatisfying_set(RandomSource& rng,
                                                                   const policy::AccessTree& t) {
  auto attrs = tree_attributes(t);
  for (int attempt = 0; attempt < 64; ++attempt) {
    policy::AttributeSet s{"decoy"};
    for (const auto& a : attrs)
      if (rng.uniform(2) == 0) s.insert(a);
    if (!brute_satisfied(t, s)) return s;
  }
  return std::nullopt;
}

}  // namespace pmod::testing
