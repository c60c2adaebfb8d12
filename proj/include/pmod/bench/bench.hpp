#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmod/abe/abe.hpp"
#include "pmod/hierarchy/hierarchy.hpp"

namespace pmod::bench {

enum class Scheme { pmod, cpabe_case1 };
std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& s);

// Policy shape per level: an AND over all of the level's attributes, or a
// seeded random threshold tree over them.
enum class Shape { all_of, random };

struct Scenario {
  std::size_t k = 1;
  std::size_t n = 1;
  std::vector<std::size_t> counts;  // |Y_i|, sums to n
  Scheme scheme = Scheme::pmod;
  Shape shape = Shape::all_of;
  std::uint64_t seed = 1;

  // Sum of the first i counts, |X_i|.
  std::size_t cumulative(std::size_t i) const;
};

// n div k per level, the remainder spread over the last levels.
std::vector<std::size_t> near_equal_split(std::size_t n, std::size_t k);
// Normal-ish split around n/k, every level at least 1, summing to n.
std::vector<std::size_t> sampled_split(std::size_t n, std::size_t k, RandomSource& rng);
// Throws InvalidArgument unless the counts are consistent.
Scenario make_scenario(std::size_t k, std::size_t n, Scheme scheme, std::uint64_t seed = 1,
                       std::optional<std::vector<std::size_t>> counts = std::nullopt);

// Attribute label j of level i, "y<i>_<j>".
std::string level_attribute(std::size_t level, std::size_t j);
std::vector<std::string> level_policies(const Scenario& s);
// Column groups over the nine census columns (the tabulated split where one
// exists, otherwise near-equal). k <= 9.
partition::PartitionPlan scenario_plan(std::size_t k);
hierarchy::HierarchySpec scenario_spec(const Scenario& s);

// Tree i = OR(T_1, ..., T_i); tree 1 is T_1 itself.
std::vector<policy::AccessTree> build_baseline_trees(const hierarchy::HierarchySpec& spec);

// Plain CP-ABE deployed per level: independent level keys, each part's key
// encapsulated under its baseline tree.
struct BaselineBundle {
  ContextPtr ctx;
  partition::Layout layout;
  std::vector<hierarchy::LevelRecord> levels;
};

BaselineBundle baseline_encrypt(const abe::PublicKey& pk, std::string_view csv,
                                const hierarchy::HierarchySpec& spec, RandomSource& rng);

struct BaselineRecovered {
  std::vector<std::uint32_t> levels;  // every level whose part was opened
  std::vector<Bytes> parts;
  OpCounts ops;
};
// One ABE decryption per level the key satisfies.
BaselineRecovered baseline_decrypt(const BaselineBundle& bundle, const abe::PrivateKey& sk);

struct Phase {
  double median_ms = 0;
  OpCounts ops;
};

struct BenchReport {
  Scenario scenario;
  std::string backend;
  std::size_t iterations = 0;
  std::size_t user_attributes = 0;  // |A_j| of the benchmarked user
  std::size_t chosen_leaves = 0;    // leaves evaluated across the decryptions
  std::uint64_t decrypt_tree_pairings = 0;  // P-MOD only: pairings inside the tree walk
  Phase keygen, encrypt, decrypt;
  abe::ElementCounts sk_elements;
  abe::ElementCounts ct_elements;

  // Formulas from the complexity table, next to the alternatives where the
  // table and the construction disagree.
  std::uint64_t predicted_encrypt_g0 = 0;
  std::uint64_t predicted_encrypt_g1_table = 0;
  std::uint64_t predicted_encrypt_g1_per_level_total = 0;
  std::uint64_t predicted_decrypt_pairings_table = 0;
  std::uint64_t predicted_decrypt_pairings_chosen = 0;  // includes e(C, D) per decryption
};

struct RunOptions {
  std::size_t iterations = 5;
  std::size_t rows = 200;
  bool counts_only = false;  // one iteration, timings still recorded
};

BenchReport run_scenario(const Scenario& s, const ContextPtr& ctx, const RunOptions& options = {});

// Element counts from serialized artifacts.
abe::ElementCounts census_public_key(ByteView b);
abe::ElementCounts census_master_key(ByteView b);
abe::ElementCounts census_private_key(ByteView b);
abe::ElementCounts census_bundle(ByteView b);
abe::ElementCounts census_baseline(const BaselineBundle& b);

struct Emitted {
  std::string csv;
  std::string table;
};
const std::vector<std::string>& report_columns();
Emitted emit_report(const std::vector<BenchReport>& reports);

}  // namespace pmod::bench
