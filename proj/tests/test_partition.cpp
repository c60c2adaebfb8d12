#include <doctest.h>

#include <nlohmann/json.hpp>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/partition/partition.hpp"

using namespace pmod;
using namespace pmod::partition;

namespace {

std::string str(const Bytes& b) { return to_string(b); }

// Random cells drawn to exercise quoting: commas, quotes, newlines, blanks.
Table random_table(RandomSource& rng, std::size_t cols, std::size_t rows) {
  static const std::vector<std::string> pieces{"x", "42", "a,b", "say \"hi\"", "two\nlines", "", " ", "é"};
  Table t;
  for (std::size_t c = 0; c < cols; ++c) t.header.push_back("c" + std::to_string(c));
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < cols; ++c)
      row.push_back(pieces[rng.uniform(pieces.size())] + pieces[rng.uniform(pieces.size())]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<std::size_t> random_split(RandomSource& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, 1);
  for (std::size_t extra = n - k; extra > 0; --extra) ++sizes[rng.uniform(k)];
  return sizes;
}

PartitionPlan random_column_plan(RandomSource& rng, const Table& t, Mode mode) {
  std::vector<std::string> names = t.header;
  for (std::size_t i = names.size(); i > 1; --i) std::swap(names[i - 1], names[rng.uniform(i)]);
  PartitionPlan plan{mode, {}};
  std::size_t next = 0;
  for (auto n : random_split(rng, names.size(), 1 + rng.uniform(names.size()))) {
    Group g;
    for (std::size_t i = 0; i < n; ++i) g.columns.push_back(names[next++]);
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

PartitionPlan random_row_plan(RandomSource& rng, const Table& t) {
  // Cut rows into runs and deal the runs to groups in shuffled order.
  std::vector<RowRange> runs;
  for (auto n : random_split(rng, t.rows.size(), 1 + rng.uniform(t.rows.size()))) {
    const std::size_t b = runs.empty() ? 0 : runs.back().end;
    runs.push_back({b, b + n});
  }
  const std::size_t k = 1 + rng.uniform(runs.size());
  PartitionPlan plan{Mode::record_clusters, std::vector<Group>(k)};
  for (std::size_t i = 0; i < runs.size(); ++i) plan.groups[i < k ? i : rng.uniform(k)].rows.push_back(runs[i]);
  for (std::size_t i = k; i > 1; --i) std::swap(plan.groups[i - 1], plan.groups[rng.uniform(i)]);
  return plan;
}

}  // namespace

TEST_CASE("csv canonicalization") {
  auto t = parse_csv("a,b\r\n1,\"x,y\"\r\n\"q\"\"\",\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[1][0] == "q\"");
  CHECK(t.rows[1][1] == "");
  CHECK(write_csv(t) == "a,b\n1,\"x,y\"\n\"q\"\"\",\n");
  CHECK(canonicalize_csv("a,b\n1,2") == "a,b\n1,2\n");
  CHECK(canonicalize_csv("\"a\",\"b\"\n\"1\",\"2\"\n") == "a,b\n1,2\n");
  CHECK(canonicalize_csv("a\n\n") == "a\n\"\"\n");
  CHECK(canonicalize_csv(canonicalize_csv("a\n\n")) == "a\n\"\"\n");
}

TEST_CASE("csv errors carry positions") {
  try {
    parse_csv("a,b\n1,2\n3\n");
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 8);
  }
  CHECK_THROWS_AS(parse_csv("a,\"b\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("a,b\"c\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("a,\"b\"c\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(""), ParseError);
}

TEST_CASE("census plans give the tabulated column counts") {
  SeededRandom rng(1);
  auto table = generate_census(50, rng);
  CHECK(table.header.size() == 9);
  const std::map<std::size_t, std::vector<std::size_t>> expected{
      {3, {2, 3, 4}}, {6, {1, 1, 1, 2, 2, 2}}, {9, {1, 1, 1, 1, 1, 1, 1, 1, 1}}};
  for (const auto& [k, sizes] : expected) {
    auto split = partition::partition(table, census_plan(k));
    REQUIRE(split.parts.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
      auto part = parse_csv(str(split.parts[i]));
      CHECK(part.header.size() == sizes[i]);
      CHECK(part.rows.size() == 50);
    }
    CHECK(str(merge_parts(split.layout, 1, split.parts)) == write_csv(table));
  }
  CHECK_THROWS_AS(census_plan(4), InvalidArgument);
}

TEST_CASE("k = 1 returns the canonical input") {
  const std::string input = "a,b\r\n1,2\r\n";
  PartitionPlan plan{Mode::column_groups, {Group{{"a", "b"}, {}}}};
  auto split = partition::partition(input, plan);
  REQUIRE(split.parts.size() == 1);
  CHECK(str(split.parts[0]) == "a,b\n1,2\n");
}

TEST_CASE("suffix views drop the withheld groups") {
  SeededRandom rng(2);
  auto table = generate_census(20, rng);
  auto split = partition::partition(table, census_plan(3));
  std::vector<Bytes> suffix(split.parts.begin() + 1, split.parts.end());
  auto view = parse_csv(str(merge_parts(split.layout, 2, suffix)));
  CHECK(view.header.size() == 7);
  CHECK(view.header.front() == "age");
  CHECK(std::find(view.header.begin(), view.header.end(), "ssn") == view.header.end());
  CHECK(view.rows.size() == 20);

  CHECK_THROWS_AS(merge_parts(split.layout, 1, {}), InvalidArgument);
  CHECK_THROWS_AS(merge_parts(split.layout, 1, suffix), FormatError);
  std::vector<Bytes> swapped{split.parts[2], split.parts[1]};
  CHECK_THROWS_AS(merge_parts(split.layout, 2, swapped), FormatError);
}

TEST_CASE("partition and merge are lossless, 100 fixtures per mode") {
  SeededRandom rng(3);
  for (int t = 0; t < 100; ++t) {
    auto table = random_table(rng, 1 + rng.uniform(8), 1 + rng.uniform(12));
    auto canonical = write_csv(table);
    REQUIRE(parse_csv(canonical) == table);

    auto cols = random_column_plan(rng, table, Mode::column_groups);
    auto a = partition::partition(table, cols);
    CHECK(str(merge_parts(a.layout, 1, a.parts)) == canonical);
    CHECK(layout_from_json(to_json(a.layout)) == a.layout);
    CHECK(plan_from_json(to_json(cols)) == cols);

    auto rows = random_row_plan(rng, table);
    auto b = partition::partition(table, rows);
    CHECK(str(merge_parts(b.layout, 1, b.parts)) == canonical);
    CHECK(layout_from_json(to_json(b.layout)) == b.layout);
    CHECK(plan_from_json(to_json(rows)) == rows);

    Table single{table.header, {table.rows.front()}};
    auto fields = random_column_plan(rng, single, Mode::single_record_fields);
    auto c = partition::partition(single, fields);
    CHECK(str(merge_parts(c.layout, 1, c.parts)) == write_csv(single));
  }
}

TEST_CASE("plans that do not fit the file are rejected") {
  auto table = parse_csv("a,b,c\n1,2,3\n4,5,6\n");
  auto cols = [](std::vector<std::vector<std::string>> groups) {
    PartitionPlan p{Mode::column_groups, {}};
    for (auto& g : groups) p.groups.push_back(Group{std::move(g), {}});
    return p;
  };
  CHECK_THROWS_AS(partition::partition(table, cols({{"a", "b"}, {"z"}})), InvalidArgument);
  CHECK_THROWS_AS(partition::partition(table, cols({{"a", "b"}, {"b", "c"}})), InvalidArgument);
  CHECK_THROWS_AS(partition::partition(table, cols({{"a", "b"}})), InvalidArgument);
  CHECK_THROWS_AS(partition::partition(table, cols({{"a", "b", "c"}, {}})), InvalidArgument);
  CHECK_THROWS_AS(partition::partition(table, PartitionPlan{Mode::column_groups, {}}), InvalidArgument);

  PartitionPlan fields = cols({{"a"}, {"b", "c"}});
  fields.mode = Mode::single_record_fields;
  CHECK_THROWS_AS(partition::partition(table, fields), InvalidArgument);

  PartitionPlan rows{Mode::record_clusters, {Group{{}, {{0, 1}}}, Group{{}, {{0, 2}}}}};
  CHECK_THROWS_AS(partition::partition(table, rows), InvalidArgument);
  rows.groups = {Group{{}, {{0, 1}}}};
  CHECK_THROWS_AS(partition::partition(table, rows), InvalidArgument);
  rows.groups = {Group{{}, {{0, 3}}}};
  CHECK_THROWS_AS(partition::partition(table, rows), InvalidArgument);

  CHECK_THROWS_AS(plan_from_json(nlohmann::json::parse(R"({"mode":"diagonal","groups":[]})")), FormatError);
  CHECK_THROWS_AS(plan_from_json(nlohmann::json::parse(R"({"groups":[["a"]]})")), FormatError);
}

TEST_CASE("parts open only under their own level key") {
  SeededRandom rng(4);
  auto root = keychain::generate_root(rng);
  std::vector<keychain::LevelKey> chain;
  for (std::uint32_t i = 1; i <= 5; ++i) chain.push_back(keychain::chain_from(root, i));
  const Bytes part = Bytes{'h', 'e', 'l', 'l', 'o'};
  for (const auto& key : chain) {
    auto ep = encrypt_part(part, key, rng);
    CHECK(ep.level == key.level());
    CHECK(ep.plaintext_digest == sha256(part));
    CHECK(decrypt_part(ep, key) == part);
    for (const auto& other : chain) {
      if (other == key) continue;
      // Relabel so the AEAD itself is exercised, not just the level check.
      keychain::LevelKey relabeled(ep.level, other.bytes());
      CHECK_THROWS_AS(decrypt_part(ep, relabeled), AuthenticationFailure);
      CHECK_THROWS_AS(decrypt_part(ep, other), AuthenticationFailure);
    }
  }
}

TEST_CASE("tampering and serialization") {
  SeededRandom rng(5);
  auto key = keychain::generate_root(rng);
  const Bytes part(100, 'x');
  auto ep = encrypt_part(part, key, rng);

  auto flipped = ep;
  flipped.ciphertext[7] ^= 1;
  CHECK_THROWS_AS(decrypt_part(flipped, key), AuthenticationFailure);
  auto relevel = ep;
  relevel.level = 2;
  CHECK_THROWS_AS(decrypt_part(relevel, keychain::LevelKey(2, key.bytes())), AuthenticationFailure);
  auto digest = ep;
  digest.plaintext_digest[0] ^= 1;
  CHECK_THROWS_AS(decrypt_part(digest, key), AuthenticationFailure);

  auto bytes = serialize(ep);
  CHECK(bytes.size() == 1 + 4 + 12 + 16 + 32 + 4 + 100);
  CHECK(bytes[0] == 1);
  CHECK(bytes[4] == 1);
  CHECK(std::equal(ep.nonce.begin(), ep.nonce.end(), bytes.begin() + 5));
  CHECK(std::equal(ep.tag.begin(), ep.tag.end(), bytes.begin() + 17));
  CHECK(deserialize_part(bytes) == ep);
  bytes.push_back(0);
  CHECK_THROWS_AS(deserialize_part(bytes), FormatError);
  bytes.resize(20);
  CHECK_THROWS_AS(deserialize_part(bytes), FormatError);
}
