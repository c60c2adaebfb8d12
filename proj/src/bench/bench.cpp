#include "pmod/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/policy/policy_text.hpp"

namespace pmod::bench {

namespace {

Bytes wrap_ad(std::uint32_t level) {
  ByteWriter w;
  w.raw(as_bytes("pmod-wrap"));
  w.u32(level);
  return std::move(w).bytes();
}

policy::PolicyNode random_gate(std::vector<std::string> attrs, RandomSource& rng) {
  if (attrs.size() == 1) return policy::PolicyNode::leaf(attrs.front());
  const std::size_t arity = 2 + rng.uniform(std::min<std::size_t>(attrs.size() - 1, 3));
  std::vector<std::vector<std::string>> groups(arity);
  for (std::size_t i = 0; i < attrs.size(); ++i) groups[i < arity ? i : rng.uniform(arity)].push_back(attrs[i]);
  std::vector<policy::PolicyNode> children;
  for (auto& g : groups) children.push_back(random_gate(std::move(g), rng));
  return policy::PolicyNode::gate(1 + rng.uniform(arity), std::move(children));
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::string join_counts(const std::vector<std::size_t>& c) {
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ";" : "") + std::to_string(c[i]);
  return s;
}

}  // namespace

std::string scheme_name(Scheme s) { return s == Scheme::pmod ? "pmod" : "cpabe_case1"; }

Scheme scheme_from_name(const std::string& s) {
  if (s == "pmod") return Scheme::pmod;
  if (s == "cpabe_case1" || s == "cpabe") return Scheme::cpabe_case1;
  throw InvalidArgument("unknown scheme '" + s + "'");
}

std::size_t Scenario::cumulative(std::size_t i) const {
  return std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(i), std::size_t{0});
}

std::vector<std::size_t> near_equal_split(std::size_t n, std::size_t k) {
  if (k == 0 || n < k) throw InvalidArgument("need 1 <= k <= N");
  std::vector<std::size_t> c(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++c[k - 1 - i];
  return c;
}

std::vector<std::size_t> sampled_split(std::size_t n, std::size_t k, RandomSource& rng) {
  if (k == 0 || n < k) throw InvalidArgument("need 1 <= k <= N");
  // Box-Muller draws around n/k with a standard deviation of a quarter of it.
  const double mean = static_cast<double>(n) / static_cast<double>(k);
  std::vector<std::size_t> c;
  for (std::size_t i = 0; i < k; ++i) {
    const double u1 = (static_cast<double>(rng.uniform(1u << 30)) + 1) / (1u << 30);
    const double u2 = static_cast<double>(rng.uniform(1u << 30)) / (1u << 30);
    const double z = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
    c.push_back(static_cast<std::size_t>(std::max(1.0, std::round(mean + z * mean / 4))));
  }
  // Repair the sum one unit at a time, never dropping a level below 1.
  auto total = std::accumulate(c.begin(), c.end(), std::size_t{0});
  while (total > n) {
    auto it = std::max_element(c.begin(), c.end());
    --*it;
    --total;
  }
  while (total < n) {
    ++*std::min_element(c.begin(), c.end());
    ++total;
  }
  return c;
}

Scenario make_scenario(std::size_t k, std::size_t n, Scheme scheme, std::uint64_t seed,
                       std::optional<std::vector<std::size_t>> counts) {
  Scenario s{k, n, counts ? *counts : near_equal_split(n, k), scheme, Shape::all_of, seed};
  if (s.counts.size() != k) throw InvalidArgument("one count per level is required");
  if (std::any_of(s.counts.begin(), s.counts.end(), [](auto c) { return c == 0; }))
    throw InvalidArgument("every level needs at least one attribute");
  if (s.cumulative(k) != n) throw InvalidArgument("level counts must sum to N");
  return s;
}

std::string level_attribute(std::size_t level, std::size_t j) {
  return "y" + std::to_string(level) + "_" + std::to_string(j);
}

std::vector<std::string> level_policies(const Scenario& s) {
  SeededRandom rng(s.seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.k; ++i) {
    std::vector<std::string> attrs;
    for (std::size_t j = 0; j < s.counts[i]; ++j) attrs.push_back(level_attribute(i + 1, j));
    if (s.shape == Shape::all_of) {
      std::vector<policy::PolicyNode> leaves;
      for (auto& a : attrs) leaves.push_back(policy::PolicyNode::leaf(a));
      out.push_back(policy::to_policy_string(policy::AccessTree(policy::PolicyNode::all_of(std::move(leaves)))));
    } else {
      out.push_back(policy::to_policy_string(policy::AccessTree(random_gate(std::move(attrs), rng))));
    }
  }
  return out;
}

partition::PartitionPlan scenario_plan(std::size_t k) {
  if (k == 3 || k == 6 || k == 9) return partition::census_plan(k);
  const auto& cols = partition::census_columns();
  if (k == 0 || k > cols.size()) throw InvalidArgument("k must be between 1 and 9");
  partition::PartitionPlan plan{partition::Mode::column_groups, {}};
  std::size_t next = 0;
  for (auto n : near_equal_split(cols.size(), k)) {
    partition::Group g;
    for (std::size_t i = 0; i < n; ++i) g.columns.push_back(cols[next++]);
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

hierarchy::HierarchySpec scenario_spec(const Scenario& s) {
  return hierarchy::make_spec(level_policies(s), scenario_plan(s.k));
}

std::vector<policy::AccessTree> build_baseline_trees(const hierarchy::HierarchySpec& spec) {
  std::vector<policy::AccessTree> out;
  std::vector<policy::PolicyNode> branches;
  for (const auto& level : spec.levels) {
    branches.push_back(level.tree.root());
    out.push_back(branches.size() == 1 ? level.tree
                                       : policy::AccessTree(policy::PolicyNode::any_of(branches)));
  }
  return out;
}

BaselineBundle baseline_encrypt(const abe::PublicKey& pk, std::string_view csv,
                                const hierarchy::HierarchySpec& spec, RandomSource& rng) {
  auto split = partition::partition(csv, spec.plan);
  auto trees = build_baseline_trees(spec);
  const auto& ctx = *pk.ctx;
  BaselineBundle out{pk.ctx, split.layout, {}};
  for (std::size_t i = 0; i < spec.k(); ++i) {
    const auto level = static_cast<std::uint32_t>(i + 1);
    keychain::LevelKey::Material m{};
    rng.fill(m);
    keychain::LevelKey key(level, m);  // independent per level: no chain
    auto part = partition::encrypt_part(split.parts[i], key, rng);
    const G1Element z = ctx.random_g1(rng);
    auto kem = abe::encrypt(pk, z, trees[i], rng);
    auto wrapped = aead_seal(hierarchy::wrap_key(ctx, level, z), rng, key.bytes(), wrap_ad(level));
    out.levels.push_back({level, std::move(kem), std::move(wrapped), std::move(part)});
  }
  return out;
}

BaselineRecovered baseline_decrypt(const BaselineBundle& bundle, const abe::PrivateKey& sk) {
  const auto& ctx = *bundle.ctx;
  const auto start = ctx.op_counters();
  BaselineRecovered out;
  for (const auto& rec : bundle.levels) {
    if (!policy::satisfies(rec.kem.tree, sk.attributes)) continue;
    auto z = abe::decrypt(rec.kem, sk);
    keychain::LevelKey key(rec.level, aead_open(hierarchy::wrap_key(ctx, rec.level, z), rec.wrapped_key,
                                                wrap_ad(rec.level)));
    out.levels.push_back(rec.level);
    out.parts.push_back(partition::decrypt_part(rec.part, key));
  }
  if (out.levels.empty()) throw NoLevelSatisfied("no level satisfied by the key's attributes");
  out.ops = ctx.op_counters() - start;
  return out;
}

BenchReport run_scenario(const Scenario& s, const ContextPtr& ctx, const RunOptions& options) {
  SeededRandom rng(s.seed);
  SeededRandom data_rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto csv = partition::write_csv(partition::generate_census(options.rows, data_rng));
  const auto spec = scenario_spec(s);
  auto [pk, mk] = abe::setup(ctx, rng);

  // The top-level user: T_1's attributes for P-MOD, every attribute for the
  // baseline so it can satisfy each replicated tree on its own.
  policy::AttributeSet attrs;
  const std::size_t owned_levels = s.scheme == Scheme::pmod ? 1 : s.k;
  for (std::size_t i = 0; i < owned_levels; ++i)
    for (std::size_t j = 0; j < s.counts[i]; ++j) attrs.insert(level_attribute(i + 1, j));

  BenchReport r;
  r.scenario = s;
  r.backend = ctx->backend_id();
  r.iterations = options.counts_only ? 1 : std::max<std::size_t>(1, options.iterations);
  r.user_attributes = attrs.size();

  std::vector<double> tk, te, td;
  for (std::size_t it = 0; it < r.iterations; ++it) {
    auto c0 = ctx->op_counters();
    std::optional<abe::PrivateKey> sk;
    tk.push_back(time_ms([&] { sk = abe::keygen(mk, attrs, rng); }));
    auto c1 = ctx->op_counters();

    if (s.scheme == Scheme::pmod) {
      std::optional<hierarchy::LevelBundle> bundle;
      te.push_back(time_ms([&] { bundle = hierarchy::pmod_encrypt(pk, csv, spec, rng, {"1970-01-01T00:00:00Z"}); }));
      auto c2 = ctx->op_counters();
      std::optional<hierarchy::Recovered> got;
      td.push_back(time_ms([&] { got = hierarchy::pmod_decrypt(*bundle, *sk); }));
      auto c3 = ctx->op_counters();
      if (it == 0) {
        r.keygen.ops = c1 - c0;
        r.encrypt.ops = c2 - c1;
        r.decrypt.ops = c3 - c2;
        r.sk_elements = abe::count_elements(*sk);
        r.ct_elements = hierarchy::count_elements(*bundle);
        auto sel = policy::satisfies(bundle->levels.at(got->achieved_level - 1).kem.tree, sk->attributes);
        r.chosen_leaves = sel->leaf_count();
        r.decrypt_tree_pairings = got->abe_tree_ops.pairings;
        r.predicted_decrypt_pairings_chosen = 2 * r.chosen_leaves + 1;
      }
    } else {
      std::optional<BaselineBundle> bundle;
      te.push_back(time_ms([&] { bundle = baseline_encrypt(pk, csv, spec, rng); }));
      auto c2 = ctx->op_counters();
      std::optional<BaselineRecovered> got;
      td.push_back(time_ms([&] { got = baseline_decrypt(*bundle, *sk); }));
      auto c3 = ctx->op_counters();
      if (it == 0) {
        r.keygen.ops = c1 - c0;
        r.encrypt.ops = c2 - c1;
        r.decrypt.ops = c3 - c2;
        r.sk_elements = abe::count_elements(*sk);
        r.ct_elements = census_baseline(*bundle);
        r.chosen_leaves = 0;
        r.predicted_decrypt_pairings_chosen = 0;
        for (const auto& rec : bundle->levels) {
          const auto leaves = policy::satisfies(rec.kem.tree, sk->attributes)->leaf_count();
          r.chosen_leaves += leaves;
          r.predicted_decrypt_pairings_chosen += 2 * leaves + 1;
        }
      }
    }
  }
  r.keygen.median_ms = median(tk);
  r.encrypt.median_ms = median(te);
  r.decrypt.median_ms = median(td);

  const std::uint64_t k = s.k;
  if (s.scheme == Scheme::pmod) {
    r.predicted_encrypt_g0 = 2 * s.cumulative(s.k) + k;
    r.predicted_encrypt_g1_table = 2;
    r.predicted_decrypt_pairings_table = 2 * r.user_attributes;
  } else {
    std::uint64_t sum_x = 0;
    for (std::size_t i = 1; i <= s.k; ++i) sum_x += s.cumulative(i);
    r.predicted_encrypt_g0 = 2 * sum_x + k;
    r.predicted_encrypt_g1_table = 2 * k;
    // |A_j| read as the attributes a decryption actually uses (T_1's).
    r.predicted_decrypt_pairings_table = k * (2 * s.counts[0] + 1);
  }
  r.predicted_encrypt_g1_per_level_total = 2 * k;
  return r;
}

abe::ElementCounts census_public_key(ByteView b) { return abe::count_elements(abe::deserialize_public_key(b)); }
abe::ElementCounts census_master_key(ByteView b) { return abe::count_elements(abe::deserialize_master_key(b)); }
abe::ElementCounts census_private_key(ByteView b) { return abe::count_elements(abe::deserialize_private_key(b)); }
abe::ElementCounts census_bundle(ByteView b) { return hierarchy::count_elements(hierarchy::deserialize_bundle(b)); }

abe::ElementCounts census_baseline(const BaselineBundle& b) {
  abe::ElementCounts total;
  for (const auto& rec : b.levels) total += abe::count_elements(abe::deserialize_ciphertext(b.ctx, abe::serialize(rec.kem)));
  return total;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "scheme", "backend", "k", "N", "y_counts", "iterations", "user_attributes", "chosen_leaves",
      "keygen_ms", "encrypt_ms", "decrypt_ms",
      "keygen_g0", "encrypt_g0", "encrypt_g1", "decrypt_pairings", "decrypt_tree_pairings", "decrypt_g1",
      "predicted_encrypt_g0", "predicted_encrypt_g1_table", "predicted_encrypt_g1_per_level_total",
      "predicted_decrypt_pairings_table", "predicted_decrypt_pairings_chosen",
      "sk_g0", "ct_g0", "ct_g1"};
  return cols;
}

Emitted emit_report(const std::vector<BenchReport>& reports) {
  Emitted out;
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out.csv += (i ? "," : "") + cols[i];
  out.csv += '\n';

  auto ms = [](double v) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(3) << v;
    return o.str();
  };
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    const auto& s = r.scenario;
    rows.push_back({scheme_name(s.scheme), r.backend, std::to_string(s.k), std::to_string(s.n),
                    join_counts(s.counts), std::to_string(r.iterations), std::to_string(r.user_attributes),
                    std::to_string(r.chosen_leaves), ms(r.keygen.median_ms), ms(r.encrypt.median_ms),
                    ms(r.decrypt.median_ms), std::to_string(r.keygen.ops.g0_ops),
                    std::to_string(r.encrypt.ops.g0_ops), std::to_string(r.encrypt.ops.g1_ops),
                    std::to_string(r.decrypt.ops.pairings), std::to_string(r.decrypt_tree_pairings),
                    std::to_string(r.decrypt.ops.g1_ops),
                    std::to_string(r.predicted_encrypt_g0), std::to_string(r.predicted_encrypt_g1_table),
                    std::to_string(r.predicted_encrypt_g1_per_level_total),
                    std::to_string(r.predicted_decrypt_pairings_table),
                    std::to_string(r.predicted_decrypt_pairings_chosen), std::to_string(r.sk_elements.g0),
                    std::to_string(r.ct_elements.g0), std::to_string(r.ct_elements.g1)});
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out.csv += (i ? "," : "") + row[i];
    out.csv += '\n';
  }

  // Human table: a compact subset.
  const std::vector<std::size_t> pick{0, 2, 3, 8, 9, 10, 12, 17, 14, 21};
  std::vector<std::size_t> width(pick.size());
  for (std::size_t c = 0; c < pick.size(); ++c) {
    width[c] = cols[pick[c]].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[pick[c]].size());
  }
  auto line = [&](auto get) {
    for (std::size_t c = 0; c < pick.size(); ++c) {
      const std::string v = get(pick[c]);
      out.table += (c ? "  " : "") + std::string(width[c] - v.size(), ' ') + v;
    }
    out.table += '\n';
  };
  line([&](std::size_t i) { return cols[i]; });
  for (const auto& row : rows) line([&](std::size_t i) { return row[i]; });
  return out;
}

}  // namespace pmod::bench
