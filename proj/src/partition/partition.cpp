#include "pmod/partition/partition.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod::partition {

using nlohmann::json;

namespace {

constexpr std::uint8_t kPartVersion = 1;

Bytes to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

bool column_mode(Mode m) { return m != Mode::record_clusters; }

Bytes part_ad(std::uint32_t level, const Digest& digest) {
  ByteWriter w;
  w.raw(as_bytes("pmod-part"));
  w.u8(kPartVersion);
  w.u32(level);
  w.raw(digest);
  return std::move(w).bytes();
}

template <typename F>
auto json_field(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::single_record_fields: return "single_record_fields";
    case Mode::record_clusters: return "record_clusters";
    case Mode::column_groups: return "column_groups";
  }
  return "?";
}

Mode mode_from_name(const std::string& s) {
  for (Mode m : {Mode::single_record_fields, Mode::record_clusters, Mode::column_groups})
    if (mode_name(m) == s) return m;
  throw FormatError("unknown partition mode '" + s + "'");
}

json to_json(const PartitionPlan& plan) {
  json groups = json::array();
  for (const auto& g : plan.groups) {
    if (column_mode(plan.mode)) {
      groups.push_back(g.columns);
    } else {
      json ranges = json::array();
      for (const auto& r : g.rows) ranges.push_back({r.begin, r.end});
      groups.push_back(std::move(ranges));
    }
  }
  return {{"mode", mode_name(plan.mode)}, {"groups", std::move(groups)}};
}

PartitionPlan plan_from_json(const json& j) {
  return json_field("partition plan", [&] {
    PartitionPlan plan;
    plan.mode = mode_from_name(j.at("mode").get<std::string>());
    for (const auto& g : j.at("groups")) {
      Group group;
      if (column_mode(plan.mode)) {
        group.columns = g.get<std::vector<std::string>>();
      } else {
        for (const auto& r : g) {
          if (!r.is_array() || r.size() != 2) throw FormatError("row ranges are [begin, end] pairs");
          group.rows.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>()});
        }
      }
      plan.groups.push_back(std::move(group));
    }
    if (plan.groups.empty()) throw FormatError("partition plan has no groups");
    return plan;
  });
}

json to_json(const Layout& l) {
  json j{{"mode", mode_name(l.mode)}, {"columns", l.columns}, {"rows", l.rows}};
  if (column_mode(l.mode)) {
    j["groups"] = l.column_positions;
  } else {
    json groups = json::array();
    for (const auto& g : l.row_ranges) {
      json ranges = json::array();
      for (const auto& r : g) ranges.push_back({r.begin, r.end});
      groups.push_back(std::move(ranges));
    }
    j["groups"] = std::move(groups);
  }
  return j;
}

Layout layout_from_json(const json& j) {
  return json_field("layout", [&] {
    Layout l;
    l.mode = mode_from_name(j.at("mode").get<std::string>());
    l.columns = j.at("columns").get<std::size_t>();
    l.rows = j.at("rows").get<std::size_t>();
    if (column_mode(l.mode)) {
      l.column_positions = j.at("groups").get<std::vector<std::vector<std::size_t>>>();
    } else {
      for (const auto& g : j.at("groups")) {
        std::vector<RowRange> ranges;
        for (const auto& r : g) ranges.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
        l.row_ranges.push_back(std::move(ranges));
      }
    }
    return l;
  });
}

Partitioned partition(const Table& table, const PartitionPlan& plan) {
  if (plan.k() == 0) throw InvalidArgument("a partition plan needs at least one group");
  Partitioned out;
  Layout& layout = out.layout;
  layout.mode = plan.mode;
  layout.columns = table.header.size();
  layout.rows = table.rows.size();

  if (column_mode(plan.mode)) {
    if (plan.mode == Mode::single_record_fields && table.rows.size() != 1)
      throw InvalidArgument("single_record_fields needs a file with exactly one record");
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (!index.emplace(table.header[c], c).second)
        throw InvalidArgument("duplicate column '" + table.header[c] + "'");
    std::set<std::size_t> used;
    for (const auto& g : plan.groups) {
      if (g.columns.empty()) throw InvalidArgument("empty column group");
      std::vector<std::size_t> positions;
      for (const auto& name : g.columns) {
        auto it = index.find(name);
        if (it == index.end()) throw InvalidArgument("unknown column '" + name + "'");
        if (!used.insert(it->second).second) throw InvalidArgument("column '" + name + "' is in two groups");
        positions.push_back(it->second);
      }
      layout.column_positions.push_back(std::move(positions));
    }
    if (used.size() != table.header.size()) throw InvalidArgument("column groups do not cover the file");

    for (const auto& positions : layout.column_positions) {
      Table part;
      for (auto c : positions) part.header.push_back(table.header[c]);
      for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        for (auto c : positions) cells.push_back(row[c]);
        part.rows.push_back(std::move(cells));
      }
      out.parts.push_back(to_bytes(write_csv(part)));
    }
    return out;
  }

  std::vector<int> owner(table.rows.size(), -1);
  for (std::size_t gi = 0; gi < plan.groups.size(); ++gi) {
    const auto& g = plan.groups[gi];
    if (g.rows.empty()) throw InvalidArgument("empty record cluster");
    for (const auto& r : g.rows) {
      if (r.begin >= r.end || r.end > table.rows.size())
        throw InvalidArgument("row range [" + std::to_string(r.begin) + ", " + std::to_string(r.end) +
                              ") is empty or out of bounds");
      for (auto i = r.begin; i < r.end; ++i) {
        if (owner[i] != -1) throw InvalidArgument("row " + std::to_string(i) + " is in two clusters");
        owner[i] = static_cast<int>(gi);
      }
    }
    layout.row_ranges.push_back(g.rows);
  }
  if (std::count(owner.begin(), owner.end(), -1) != 0)
    throw InvalidArgument("record clusters do not cover the file");
  for (const auto& ranges : layout.row_ranges) {
    Table part{table.header, {}};
    for (const auto& r : ranges)
      for (auto i = r.begin; i < r.end; ++i) part.rows.push_back(table.rows[i]);
    out.parts.push_back(to_bytes(write_csv(part)));
  }
  return out;
}

Partitioned partition(std::string_view csv, const PartitionPlan& plan) {
  return partition(parse_csv(csv), plan);
}

Bytes merge_parts(const Layout& layout, std::uint32_t first_level, const std::vector<Bytes>& parts) {
  if (parts.empty()) throw InvalidArgument("no parts to merge");
  const std::size_t k = layout.k();
  if (first_level == 0 || first_level - 1 + parts.size() != k)
    throw FormatError("parts do not form the suffix starting at level " + std::to_string(first_level));

  std::vector<Table> tables;
  for (const auto& p : parts) {
    try {
      tables.push_back(parse_csv(to_string(p)));
    } catch (const ParseError& e) {
      throw FormatError(std::string("part is not CSV: ") + e.what());
    }
  }

  if (column_mode(layout.mode)) {
    // Original column position -> (part, column within part).
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> where;
    for (std::size_t p = 0; p < tables.size(); ++p) {
      const auto& positions = layout.column_positions.at(first_level - 1 + p);
      if (tables[p].header.size() != positions.size() || tables[p].rows.size() != layout.rows)
        throw FormatError("part " + std::to_string(first_level + p) + " does not match the layout");
      for (std::size_t c = 0; c < positions.size(); ++c) {
        if (positions[c] >= layout.columns || !where.emplace(positions[c], std::pair{p, c}).second)
          throw FormatError("layout has invalid column positions");
      }
    }
    Table view;
    for (const auto& [pos, src] : where) view.header.push_back(tables[src.first].header[src.second]);
    for (std::size_t r = 0; r < layout.rows; ++r) {
      std::vector<std::string> cells;
      for (const auto& [pos, src] : where) cells.push_back(tables[src.first].rows[r][src.second]);
      view.rows.push_back(std::move(cells));
    }
    return to_bytes(write_csv(view));
  }

  std::map<std::size_t, const std::vector<std::string>*> rows;
  for (std::size_t p = 0; p < tables.size(); ++p) {
    if (tables[p].header != tables.front().header || tables[p].header.size() != layout.columns)
      throw FormatError("record clusters disagree on the header");
    std::size_t next = 0;
    for (const auto& r : layout.row_ranges.at(first_level - 1 + p)) {
      for (auto i = r.begin; i < r.end; ++i) {
        if (next >= tables[p].rows.size() || i >= layout.rows || !rows.emplace(i, &tables[p].rows[next]).second)
          throw FormatError("part " + std::to_string(first_level + p) + " does not match the layout");
        ++next;
      }
    }
    if (next != tables[p].rows.size())
      throw FormatError("part " + std::to_string(first_level + p) + " does not match the layout");
  }
  Table view{tables.front().header, {}};
  for (const auto& [i, row] : rows) view.rows.push_back(*row);
  return to_bytes(write_csv(view));
}

EncryptedPart encrypt_part(ByteView part, const keychain::LevelKey& key, RandomSource& rng) {
  EncryptedPart ep;
  ep.level = key.level();
  ep.plaintext_digest = sha256(part);
  auto sealed = aead_seal(key.bytes(), rng, part, part_ad(ep.level, ep.plaintext_digest));
  ep.nonce = sealed.nonce;
  ep.tag = sealed.tag;
  ep.ciphertext = std::move(sealed.ciphertext);
  return ep;
}

Bytes decrypt_part(const EncryptedPart& ep, const keychain::LevelKey& key) {
  if (key.level() != ep.level)
    throw AuthenticationFailure("level key " + std::to_string(key.level()) +
                                " does not open part " + std::to_string(ep.level));
  AeadSealed sealed{ep.nonce, ep.tag, ep.ciphertext};
  Bytes plain = aead_open(key.bytes(), sealed, part_ad(ep.level, ep.plaintext_digest));
  if (!constant_time_equal(sha256(plain), ep.plaintext_digest))
    throw IntegrityError("part digest mismatch");
  return plain;
}

Bytes serialize(const EncryptedPart& ep) {
  ByteWriter w;
  w.u8(kPartVersion);
  w.u32(ep.level);
  w.raw(ep.nonce);
  w.raw(ep.tag);
  w.raw(ep.plaintext_digest);
  w.blob(ep.ciphertext);
  return std::move(w).bytes();
}

EncryptedPart deserialize_part(ByteView b) {
  ByteReader r(b);
  if (r.u8() != kPartVersion) throw FormatError("unsupported part version");
  EncryptedPart ep;
  ep.level = r.u32();
  if (ep.level == 0) throw FormatError("part level 0");
  auto copy = [&](auto& dst) {
    auto src = r.raw(dst.size());
    std::copy(src.begin(), src.end(), dst.begin());
  };
  copy(ep.nonce);
  copy(ep.tag);
  copy(ep.plaintext_digest);
  auto body = r.blob();
  ep.ciphertext.assign(body.begin(), body.end());
  r.expect_done();
  return ep;
}

const std::vector<std::string>& census_columns() {
  static const std::vector<std::string> cols{
      "ssn",        "name",         "age",  "education",     "occupation",
      "workclass",  "marital_status", "race", "native_country"};
  return cols;
}

Table generate_census(std::size_t rows, RandomSource& rng) {
  static const std::vector<std::string> first{"Ana", "Ben", "Chen", "Dana", "Eli", "Fatima",
                                              "Goran", "Hana", "Ivo", "Juno"};
  static const std::vector<std::string> last{"Abbott", "Baker", "Cruz", "Diaz", "Evans",
                                             "Fox", "Gupta", "Hale"};
  static const std::vector<std::string> education{"Bachelors", "HS-grad", "Masters", "Doctorate",
                                                  "Some-college", "Assoc-voc", "11th"};
  static const std::vector<std::string> occupation{"Tech-support", "Craft-repair", "Sales",
                                                   "Exec-managerial", "Prof-specialty",
                                                   "Adm-clerical", "Other-service"};
  static const std::vector<std::string> workclass{"Private", "Self-emp-inc", "Federal-gov",
                                                  "Local-gov", "State-gov", "Self-emp-not-inc"};
  static const std::vector<std::string> marital{"Married-civ-spouse", "Never-married", "Divorced",
                                                "Separated", "Widowed"};
  static const std::vector<std::string> race{"White", "Black", "Asian-Pac-Islander",
                                             "Amer-Indian-Eskimo", "Other"};
  static const std::vector<std::string> country{"United-States", "Mexico", "Philippines",
                                                "Germany", "Canada", "India", "Cuba"};
  auto pick = [&](const std::vector<std::string>& v) { return v[rng.uniform(v.size())]; };
  auto digits = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('0' + rng.uniform(10));
    return s;
  };

  Table t{census_columns(), {}};
  t.rows.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    t.rows.push_back({digits(3) + "-" + digits(2) + "-" + digits(4),
                      pick(last) + ", " + pick(first),
                      std::to_string(17 + rng.uniform(74)),
                      pick(education),
                      pick(occupation),
                      pick(workclass),
                      pick(marital),
                      pick(race),
                      pick(country)});
  }
  return t;
}

PartitionPlan census_plan(std::size_t k) {
  std::vector<std::size_t> sizes;
  switch (k) {
    case 3: sizes = {2, 3, 4}; break;
    case 6: sizes = {1, 1, 1, 2, 2, 2}; break;
    case 9: sizes.assign(9, 1); break;
    default: throw InvalidArgument("census plans exist for k = 3, 6 and 9");
  }
  PartitionPlan plan;
  plan.mode = Mode::column_groups;
  const auto& cols = census_columns();
  std::size_t next = 0;
  for (auto n : sizes) {
    Group g;
    for (std::size_t i = 0; i < n; ++i) g.columns.push_back(cols[next++]);
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

}  // namespace pmod::partition
