#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmod/abe/abe.hpp"
#include "pmod/common/crypto.hpp"
#include "pmod/keychain/keychain.hpp"
#include "pmod/partition/partition.hpp"
#include "pmod/policy/access_tree.hpp"

namespace pmod::hierarchy {

struct LevelSpec {
  std::uint32_t index = 0;
  std::string policy;  // as written
  std::string label;
  policy::AccessTree tree;
};

// Level 1 is the most privileged. Parsed from JSON:
//   {"levels": [{"index": 1, "policy": "...", "label": "..."}, ...],
//    "partition": {"mode": "column_groups", "groups": [[...], ...]}}
struct HierarchySpec {
  std::vector<LevelSpec> levels;
  partition::PartitionPlan plan;

  std::size_t k() const { return levels.size(); }
};

// Throws FormatError for structural problems and ParseError for a bad policy.
HierarchySpec parse_spec(std::string_view json_text);
HierarchySpec make_spec(const std::vector<std::string>& policies, partition::PartitionPlan plan);
std::string spec_to_json(const HierarchySpec& spec);

struct ManifestLevel {
  std::uint32_t index = 0;
  std::string label;
  std::string policy;  // canonical policy text of the embedded tree
  friend bool operator==(const ManifestLevel&, const ManifestLevel&) = default;
};

struct Manifest {
  std::size_t k = 0;
  std::string spec_hash;  // hex SHA-256 over the levels' index, label and tree
  std::string backend;
  std::string created_at;
  partition::Layout layout;
  std::vector<ManifestLevel> levels;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct LevelRecord {
  std::uint32_t level = 0;
  abe::AbeCiphertext kem;     // encapsulates z_i under T_i
  AeadSealed wrapped_key;     // sk_i under KDF(z_i, i)
  partition::EncryptedPart part;
};

struct LevelBundle {
  ContextPtr ctx;
  Manifest manifest;
  std::vector<LevelRecord> levels;
};

std::string spec_hash(const std::vector<ManifestLevel>& levels);

// Wrap key for level i: SHA-256("pmod-wrap" || u32 i || encoding of z).
AeadKey wrap_key(const PairingContext& ctx, std::uint32_t level, const G1Element& z);

struct EncryptOptions {
  // ISO 8601; the current UTC time when empty.
  std::string created_at;
};

LevelBundle pmod_encrypt(const abe::PublicKey& pk, std::string_view csv, const HierarchySpec& spec,
                         RandomSource& rng, const EncryptOptions& options = {});

// Same, with a caller supplied top-level key.
LevelBundle pmod_encrypt_with_root(const abe::PublicKey& pk, std::string_view csv,
                                   const HierarchySpec& spec, const keychain::LevelKey& root,
                                   RandomSource& rng, const EncryptOptions& options = {});

struct Recovered {
  std::uint32_t achieved_level = 0;
  std::vector<Bytes> parts;  // levels achieved_level..k
  Bytes view;                // merge_parts over those parts
  OpCounts abe_ops;          // the single ABE decryption
  OpCounts abe_tree_ops;     // its recursive tree evaluation
  OpCounts total_ops;
};

// First satisfied level wins. Throws NoLevelSatisfied when none is.
std::optional<std::uint32_t> resolve_level(const LevelBundle& bundle, const policy::AttributeSet& attrs);
Recovered pmod_decrypt(const LevelBundle& bundle, const abe::PrivateKey& sk);

// "PMODBNDL" | version u8 | manifest JSON blob | u32 k | per level:
// u32 level | kem blob | nonce 12 | tag 16 | wrapped blob | part blob
Bytes serialize(const LevelBundle& bundle);
// Validates every bundle invariant, including the spec hash.
LevelBundle deserialize_bundle(ByteView b);

std::string manifest_json(const Manifest& m);

abe::ElementCounts count_elements(const LevelBundle& bundle);

}  // namespace pmod::hierarchy
