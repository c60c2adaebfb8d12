#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmod/group/pairing_context.hpp"
#include "pmod/policy/access_tree.hpp"

namespace pmod {
class RandomSource;
}

namespace pmod::abe {

struct PublicKey {
  ContextPtr ctx;
  G0Element g;
  G0Element B;      // g^beta
  G0Element B_inv;  // g^(1/beta); carried for delegation, unused by decryption
  G1Element egg_alpha;
};

struct MasterKey {
  ContextPtr ctx;
  Scalar beta;
  G0Element g_alpha;
};

struct AttributeKey {
  G0Element D;        // g^r * h(u)^{r_u}
  G0Element D_prime;  // g^{r_u}
};

struct PrivateKey {
  ContextPtr ctx;
  G0Element D;  // g^{(alpha + r) / beta}
  std::map<std::string, AttributeKey> components;
  policy::AttributeSet attributes;
};

struct LeafComponents {
  G0Element C;        // g^{q_x(0)}
  G0Element C_prime;  // h(att(x))^{q_x(0)}
};

struct AbeCiphertext {
  ContextPtr ctx;
  policy::AccessTree tree;
  G1Element C_tilde;  // m * e(g,g)^{alpha s}
  G0Element C;        // g^{beta s}
  std::map<std::size_t, LeafComponents> leaves;  // keyed by leaf node id
};

// Per-node share polynomials, lowest coefficient first.
class SharePlan {
 public:
  SharePlan(const ScalarField& field, std::vector<std::vector<Scalar>> coefficients)
      : field_(&field), coefficients_(std::move(coefficients)) {}

  const std::vector<Scalar>& polynomial(std::size_t node_id) const {
    return coefficients_.at(node_id);
  }
  const Scalar& constant_term(std::size_t node_id) const { return polynomial(node_id).front(); }
  Scalar evaluate(std::size_t node_id, const Scalar& x) const;
  std::size_t node_count() const { return coefficients_.size(); }

 private:
  const ScalarField* field_;
  std::vector<std::vector<Scalar>> coefficients_;
};

struct KeyRandomness {
  Scalar r;
  std::map<std::string, Scalar> per_attribute;
};

std::pair<PublicKey, MasterKey> setup(ContextPtr ctx, RandomSource& rng);
// Deterministic core; beta must be nonzero.
std::pair<PublicKey, MasterKey> setup_with(ContextPtr ctx, const Scalar& alpha, const Scalar& beta);

// Throws InvalidArgument for an empty attribute set.
PrivateKey keygen(const MasterKey& mk, const policy::AttributeSet& attrs, RandomSource& rng);
PrivateKey keygen_with(const MasterKey& mk, const policy::AttributeSet& attrs,
                       const KeyRandomness& randomness);

// Top-down polynomial sharing of s: the root polynomial has constant term s
// and every other node's constant term is its parent's polynomial evaluated
// at the node's 1-based child index.
SharePlan share_secret(const ScalarField& field, const policy::AccessTree& tree, const Scalar& s,
                       RandomSource& rng);

AbeCiphertext encrypt(const PublicKey& pk, const G1Element& m, const policy::AccessTree& tree,
                      RandomSource& rng);
AbeCiphertext encrypt_with_plan(const PublicKey& pk, const G1Element& m,
                                const policy::AccessTree& tree, const SharePlan& plan);

// prod_{k in index_set, k != a} (x - k) / (a - k). Throws InvalidArgument when
// a is not in the set or the indices repeat.
Scalar lagrange_coefficient(const ScalarField& field, const Scalar& a,
                            std::span<const Scalar> index_set, const Scalar& x);

// e(g,g)^{r q_x(0)} for a node of the selection, or nullopt when the node is
// not selected or cannot be satisfied with sk. Unselected children are never
// visited.
std::optional<G1Element> decrypt_node(const AbeCiphertext& ct, const PrivateKey& sk,
                                      std::size_t node_id, const policy::SatisfyingSet& selection);

// Recovers the encapsulated element. Throws PolicyNotSatisfied when sk's
// attributes do not satisfy the tree and FormatError on a structural mismatch.
G1Element decrypt(const AbeCiphertext& ct, const PrivateKey& sk);

struct DecryptionTrace {
  G1Element message;
  policy::SatisfyingSet selection;
  OpCounts tree_ops;   // the recursive leaf/gate evaluation
  OpCounts total_ops;  // including the final e(C, D) step
};

// decrypt() with per-phase operation counts read from the context counters.
// Concurrent use of the same context skews the counts.
DecryptionTrace decrypt_traced(const AbeCiphertext& ct, const PrivateKey& sk);

// Throws FormatError unless the leaf components cover exactly the tree leaves.
void check_structure(const AbeCiphertext& ct);

// Versioned binary encodings: "PMOD" magic, version, kind, backend id, then
// the components in declaration order.
Bytes serialize(const PublicKey& pk);
Bytes serialize(const MasterKey& mk);
Bytes serialize(const PrivateKey& sk);
Bytes serialize(const AbeCiphertext& ct);
PublicKey deserialize_public_key(ByteView b);
MasterKey deserialize_master_key(ByteView b);
PrivateKey deserialize_private_key(ByteView b);
// Throws ContextMismatch when the encoding names a different backend than ctx.
AbeCiphertext deserialize_ciphertext(const ContextPtr& ctx, ByteView b);

// Backend id recorded in any of the above encodings.
std::string encoded_backend_id(ByteView b);

struct ElementCounts {
  std::size_t g0 = 0;
  std::size_t g1 = 0;
  std::size_t zp = 0;
  friend bool operator==(const ElementCounts&, const ElementCounts&) = default;
  ElementCounts& operator+=(const ElementCounts& o) {
    g0 += o.g0;
    g1 += o.g1;
    zp += o.zp;
    return *this;
  }
};

ElementCounts count_elements(const PublicKey& pk);
ElementCounts count_elements(const MasterKey& mk);
ElementCounts count_elements(const PrivateKey& sk);
ElementCounts count_elements(const AbeCiphertext& ct);

}  // namespace pmod::abe
