#include "pmod/abe/abe.hpp"

#include <algorithm>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod::abe {

using policy::AccessTree;
using policy::AttributeSet;
using policy::PolicyNode;
using policy::SatisfyingSet;

namespace {

Scalar horner(const ScalarField& f, const std::vector<Scalar>& poly, const Scalar& x) {
  Scalar acc = f.zero();
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = f.add(f.mul(acc, x), *it);
  return acc;
}

}  // namespace

Scalar SharePlan::evaluate(std::size_t node_id, const Scalar& x) const {
  return horner(*field_, polynomial(node_id), x);
}

std::pair<PublicKey, MasterKey> setup(ContextPtr ctx, RandomSource& rng) {
  const auto& F = ctx->field();
  Scalar alpha = F.random(rng);
  Scalar beta = F.random_nonzero(rng);
  return setup_with(std::move(ctx), alpha, beta);
}

std::pair<PublicKey, MasterKey> setup_with(ContextPtr ctx, const Scalar& alpha, const Scalar& beta) {
  if (beta.is_zero()) throw InvalidArgument("beta must be nonzero");
  const auto& F = ctx->field();
  const auto& g = ctx->generator();
  PublicKey pk{ctx, g, ctx->exp(g, beta), ctx->exp(g, F.inv(beta)),
               ctx->exp(ctx->pair(g, g), alpha)};
  MasterKey mk{ctx, beta, ctx->exp(g, alpha)};
  return {std::move(pk), std::move(mk)};
}

PrivateKey keygen(const MasterKey& mk, const AttributeSet& attrs, RandomSource& rng) {
  if (attrs.empty()) throw InvalidArgument("cannot issue a key for an empty attribute set");
  const auto& F = mk.ctx->field();
  KeyRandomness rnd{F.random(rng), {}};
  for (const auto& a : attrs) rnd.per_attribute.emplace(a, F.random(rng));
  return keygen_with(mk, attrs, rnd);
}

PrivateKey keygen_with(const MasterKey& mk, const AttributeSet& attrs,
                       const KeyRandomness& randomness) {
  if (attrs.empty()) throw InvalidArgument("cannot issue a key for an empty attribute set");
  const auto& ctx = *mk.ctx;
  const auto& g = ctx.generator();
  const G0Element g_r = ctx.exp(g, randomness.r);
  PrivateKey sk;
  sk.ctx = mk.ctx;
  sk.attributes = attrs;
  sk.D = ctx.exp(ctx.mul(mk.g_alpha, g_r), ctx.field().inv(mk.beta));
  for (const auto& a : attrs) {
    auto it = randomness.per_attribute.find(a);
    if (it == randomness.per_attribute.end())
      throw InvalidArgument("missing randomness for attribute '" + a + "'");
    const Scalar& r_u = it->second;
    sk.components.emplace(
        a, AttributeKey{ctx.mul(g_r, ctx.exp(ctx.hash_to_g0(a), r_u)), ctx.exp(g, r_u)});
  }
  return sk;
}

SharePlan share_secret(const ScalarField& field, const AccessTree& tree, const Scalar& s,
                       RandomSource& rng) {
  std::vector<std::vector<Scalar>> coeffs(tree.node_count());
  // Preorder ids guarantee a parent is planned before its children.
  for (std::size_t id = 0; id < tree.node_count(); ++id) {
    const PolicyNode& n = tree.node(id);
    Scalar constant = s;
    if (id != 0) {
      const std::size_t parent = tree.parent(id);
      const auto& siblings = tree.node(parent).children();
      std::size_t index = 0;
      while (siblings[index].id() != id) ++index;
      constant = horner(field, coeffs[parent], field.from_u64(index + 1));
    }
    auto& poly = coeffs[id];
    poly.push_back(constant);
    for (std::size_t d = 1; d < n.threshold(); ++d) poly.push_back(field.random(rng));
  }
  return SharePlan(field, std::move(coeffs));
}

AbeCiphertext encrypt(const PublicKey& pk, const G1Element& m, const AccessTree& tree,
                      RandomSource& rng) {
  const auto& F = pk.ctx->field();
  Scalar s = F.random(rng);
  return encrypt_with_plan(pk, m, tree, share_secret(F, tree, s, rng));
}

AbeCiphertext encrypt_with_plan(const PublicKey& pk, const G1Element& m, const AccessTree& tree,
                                const SharePlan& plan) {
  if (plan.node_count() != tree.node_count())
    throw InvalidArgument("share plan does not match the tree");
  const auto& ctx = *pk.ctx;
  const Scalar& s = plan.constant_term(0);
  AbeCiphertext ct{pk.ctx, tree, ctx.mul(m, ctx.exp(pk.egg_alpha, s)), ctx.exp(pk.B, s), {}};
  for (const PolicyNode* leaf : tree.leaves()) {
    const Scalar& q0 = plan.constant_term(leaf->id());
    ct.leaves.emplace(leaf->id(), LeafComponents{ctx.exp(pk.g, q0),
                                                 ctx.exp(ctx.hash_to_g0(leaf->attribute()), q0)});
  }
  return ct;
}

Scalar lagrange_coefficient(const ScalarField& field, const Scalar& a,
                            std::span<const Scalar> index_set, const Scalar& x) {
  for (std::size_t i = 0; i < index_set.size(); ++i)
    for (std::size_t j = i + 1; j < index_set.size(); ++j)
      if (index_set[i] == index_set[j]) throw InvalidArgument("duplicate interpolation index");
  if (std::find(index_set.begin(), index_set.end(), a) == index_set.end())
    throw InvalidArgument("interpolation index not in set");
  Scalar num = field.one(), den = field.one();
  for (const Scalar& k : index_set) {
    if (k == a) continue;
    num = field.mul(num, field.sub(x, k));
    den = field.mul(den, field.sub(a, k));
  }
  return field.div(num, den);
}

std::optional<G1Element> decrypt_node(const AbeCiphertext& ct, const PrivateKey& sk,
                                      std::size_t node_id, const SatisfyingSet& selection) {
  const auto& ctx = *sk.ctx;
  const PolicyNode& node = ct.tree.node(node_id);
  if (!selection.contains(node_id)) return std::nullopt;

  if (node.is_leaf()) {
    auto key = sk.components.find(node.attribute());
    if (key == sk.components.end()) return std::nullopt;
    auto comp = ct.leaves.find(node_id);
    if (comp == ct.leaves.end()) throw FormatError("ciphertext lacks components for a leaf");
    return ctx.div(ctx.pair(key->second.D, comp->second.C),
                   ctx.pair(key->second.D_prime, comp->second.C_prime));
  }

  auto sel = selection.selected_children.find(node_id);
  if (sel == selection.selected_children.end() || sel->second.size() != node.threshold())
    return std::nullopt;
  const auto& F = ctx.field();
  std::vector<Scalar> indices;
  for (auto idx : sel->second) indices.push_back(F.from_u64(idx));

  std::optional<G1Element> acc;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto child_pos = sel->second[i] - 1;
    if (child_pos >= node.children().size()) throw FormatError("selection index out of range");
    auto value = decrypt_node(ct, sk, node.children()[child_pos].id(), selection);
    if (!value) return std::nullopt;
    auto term = ctx.exp(*value, lagrange_coefficient(F, indices[i], indices, F.zero()));
    acc = acc ? ctx.mul(*acc, term) : term;
  }
  return acc;
}

void check_structure(const AbeCiphertext& ct) {
  if (ct.leaves.size() != ct.tree.leaf_count())
    throw FormatError("ciphertext leaf components do not match the tree");
  for (const PolicyNode* leaf : ct.tree.leaves())
    if (!ct.leaves.contains(leaf->id()))
      throw FormatError("ciphertext leaf components do not match the tree");
}

DecryptionTrace decrypt_traced(const AbeCiphertext& ct, const PrivateKey& sk) {
  check_structure(ct);
  auto selection = policy::satisfies(ct.tree, sk.attributes);
  if (!selection) throw PolicyNotSatisfied("attributes do not satisfy the access tree");
  const auto& ctx = *sk.ctx;
  const OpCounts start = ctx.op_counters();
  auto root = decrypt_node(ct, sk, 0, *selection);
  // satisfies() only selects leaves the key owns, so this means a malformed key.
  if (!root) throw FormatError("private key lacks components for its attribute set");
  const OpCounts after_tree = ctx.op_counters();
  // C~ / (e(C, D) / R)
  auto blinding = ctx.div(ctx.pair(ct.C, sk.D), *root);
  auto message = ctx.div(ct.C_tilde, blinding);
  return {message, std::move(*selection), after_tree - start, ctx.op_counters() - start};
}

G1Element decrypt(const AbeCiphertext& ct, const PrivateKey& sk) {
  return decrypt_traced(ct, sk).message;
}

ElementCounts count_elements(const PublicKey&) { return {3, 1, 0}; }
ElementCounts count_elements(const MasterKey&) { return {1, 0, 1}; }
ElementCounts count_elements(const PrivateKey& sk) { return {1 + 2 * sk.components.size(), 0, 0}; }
ElementCounts count_elements(const AbeCiphertext& ct) { return {1 + 2 * ct.leaves.size(), 1, 0}; }

}  // namespace pmod::abe
