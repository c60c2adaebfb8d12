#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pmod/common/bytes.hpp"
#include "pmod/keychain/keychain.hpp"
#include "pmod/partition/csv.hpp"

namespace pmod {
class RandomSource;
}

namespace pmod::partition {

enum class Mode { single_record_fields, record_clusters, column_groups };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& s);

// Half-open range of 0-based data row indices.
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

// One sensitivity group: column names for the field and column modes, row
// ranges for record_clusters.
struct Group {
  std::vector<std::string> columns;
  std::vector<RowRange> rows;
  friend bool operator==(const Group&, const Group&) = default;
};

// Group 1 is the most sensitive.
struct PartitionPlan {
  Mode mode = Mode::column_groups;
  std::vector<Group> groups;

  std::size_t k() const { return groups.size(); }
  friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;
};

nlohmann::json to_json(const PartitionPlan& plan);
PartitionPlan plan_from_json(const nlohmann::json& j);

// Where each part's content sits in the original table. Column positions for
// the column modes, row ranges for record_clusters. Carries no cell data and
// no column names.
struct Layout {
  Mode mode = Mode::column_groups;
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::vector<std::vector<std::size_t>> column_positions;
  std::vector<std::vector<RowRange>> row_ranges;

  std::size_t k() const {
    return mode == Mode::record_clusters ? row_ranges.size() : column_positions.size();
  }
  friend bool operator==(const Layout&, const Layout&) = default;
};

nlohmann::json to_json(const Layout& layout);
Layout layout_from_json(const nlohmann::json& j);

struct Partitioned {
  std::vector<Bytes> parts;  // canonical CSV per level, level 1 first
  Layout layout;
};

// Throws InvalidArgument for unknown columns, overlapping or non-covering
// groups, or a single_record_fields plan over a file without exactly one row.
Partitioned partition(const Table& table, const PartitionPlan& plan);
Partitioned partition(std::string_view csv, const PartitionPlan& plan);

// Reassembles the parts for levels first_level..k (in that order). Columns or
// rows of the withheld levels are left out, so the result is the view the
// holder is entitled to; passing every part reproduces the canonical input.
// Throws InvalidArgument for an empty list and FormatError when the parts do
// not fit the layout.
Bytes merge_parts(const Layout& layout, std::uint32_t first_level, const std::vector<Bytes>& parts);

struct EncryptedPart {
  std::uint32_t level = 0;
  std::array<std::uint8_t, 12> nonce{};
  std::array<std::uint8_t, 16> tag{};
  Digest plaintext_digest{};
  Bytes ciphertext;

  friend bool operator==(const EncryptedPart&, const EncryptedPart&) = default;
};

// AES-256-GCM under the level key, with the level bound as associated data.
EncryptedPart encrypt_part(ByteView part, const keychain::LevelKey& key, RandomSource& rng);
// Throws AuthenticationFailure for a wrong key, a level mismatch or any
// modification; IntegrityError if the digest disagrees after authentication.
Bytes decrypt_part(const EncryptedPart& ep, const keychain::LevelKey& key);

// version u8 | level u32 | nonce 12 | tag 16 | digest 32 | length u32 | ciphertext
Bytes serialize(const EncryptedPart& ep);
EncryptedPart deserialize_part(ByteView b);

// Synthetic stand-in for the census extract: nine columns, deterministic per
// seed.
Table generate_census(std::size_t rows, RandomSource& rng);
const std::vector<std::string>& census_columns();

// Column groups for k = 3, 6 or 9 over census_columns(), using the group sizes
// (2,3,4), (1,1,1,2,2,2) and nine singletons.
PartitionPlan census_plan(std::size_t k);

}  // namespace pmod::partition
