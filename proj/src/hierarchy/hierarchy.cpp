#include "pmod/hierarchy/hierarchy.hpp"

#include <chrono>
#include <ctime>

#include <nlohmann/json.hpp>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/policy/policy_text.hpp"

namespace pmod::hierarchy {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "PMODBNDL";
constexpr std::uint8_t kVersion = 1;

Bytes wrap_ad(std::uint32_t level) {
  ByteWriter w;
  w.raw(as_bytes("pmod-wrap"));
  w.u32(level);
  return std::move(w).bytes();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_levels(const std::vector<LevelSpec>& levels) {
  if (levels.empty()) throw FormatError("a hierarchy needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i].index != i + 1)
      throw FormatError("levels must be numbered 1..k in order; found " +
                        std::to_string(levels[i].index) + " at position " + std::to_string(i + 1));
}

}  // namespace

HierarchySpec parse_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("hierarchy spec is not JSON: ") + e.what());
  }
  HierarchySpec spec;
  try {
    for (const auto& l : j.at("levels")) {
      const auto text = l.at("policy").get<std::string>();
      spec.levels.push_back(LevelSpec{l.at("index").get<std::uint32_t>(), text,
                                      l.value("label", std::string{}), policy::parse_policy(text)});
    }
    spec.plan = partition::plan_from_json(j.at("partition"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("hierarchy spec: ") + e.what());
  }
  validate_levels(spec.levels);
  if (spec.plan.k() != spec.k())
    throw FormatError("spec has " + std::to_string(spec.k()) + " levels but the partition has " +
                      std::to_string(spec.plan.k()) + " groups");
  return spec;
}

HierarchySpec make_spec(const std::vector<std::string>& policies, partition::PartitionPlan plan) {
  HierarchySpec spec;
  for (std::size_t i = 0; i < policies.size(); ++i)
    spec.levels.push_back(LevelSpec{static_cast<std::uint32_t>(i + 1), policies[i],
                                    "L" + std::to_string(i + 1), policy::parse_policy(policies[i])});
  spec.plan = std::move(plan);
  validate_levels(spec.levels);
  if (spec.plan.k() != spec.k()) throw FormatError("level count and partition group count differ");
  return spec;
}

std::string spec_to_json(const HierarchySpec& spec) {
  json levels = json::array();
  for (const auto& l : spec.levels)
    levels.push_back({{"index", l.index}, {"policy", l.policy}, {"label", l.label}});
  return json{{"levels", levels}, {"partition", partition::to_json(spec.plan)}}.dump(2) + "\n";
}

std::string spec_hash(const std::vector<ManifestLevel>& levels) {
  json arr = json::array();
  for (const auto& l : levels)
    arr.push_back({{"index", l.index},
                   {"label", l.label},
                   {"tree", policy::to_json(policy::parse_policy(l.policy))}});
  return to_hex(sha256(arr.dump()));
}

AeadKey wrap_key(const PairingContext& ctx, std::uint32_t level, const G1Element& z) {
  ByteWriter w;
  w.raw(as_bytes("pmod-wrap"));
  w.u32(level);
  w.raw(ctx.serialize(z));
  return sha256(w.bytes());
}

LevelBundle pmod_encrypt(const abe::PublicKey& pk, std::string_view csv, const HierarchySpec& spec,
                         RandomSource& rng, const EncryptOptions& options) {
  const auto root = keychain::generate_root(rng);
  return pmod_encrypt_with_root(pk, csv, spec, root, rng, options);
}

LevelBundle pmod_encrypt_with_root(const abe::PublicKey& pk, std::string_view csv,
                                   const HierarchySpec& spec, const keychain::LevelKey& root,
                                   RandomSource& rng, const EncryptOptions& options) {
  validate_levels(spec.levels);
  if (root.level() != 1) throw InvalidArgument("the chain must start at level 1");
  if (spec.plan.k() != spec.k()) throw InvalidArgument("level count and partition group count differ");
  auto split = partition::partition(csv, spec.plan);
  const auto& ctx = *pk.ctx;

  LevelBundle bundle;
  bundle.ctx = pk.ctx;
  auto& m = bundle.manifest;
  m.k = spec.k();
  m.backend = ctx.backend_id();
  m.created_at = options.created_at.empty() ? utc_now() : options.created_at;
  m.layout = split.layout;

  keychain::LevelKey key = root;
  for (std::size_t i = 0; i < spec.k(); ++i) {
    const auto level = static_cast<std::uint32_t>(i + 1);
    if (i > 0) key = keychain::next(key);
    const auto& tree = spec.levels[i].tree;
    m.levels.push_back({level, spec.levels[i].label, policy::to_policy_string(tree)});

    auto part = partition::encrypt_part(split.parts[i], key, rng);
    const G1Element z = ctx.random_g1(rng);
    auto kem = abe::encrypt(pk, z, tree, rng);
    auto wrapped = aead_seal(wrap_key(ctx, level, z), rng, key.bytes(), wrap_ad(level));
    bundle.levels.push_back({level, std::move(kem), std::move(wrapped), std::move(part)});
  }
  m.spec_hash = spec_hash(m.levels);
  return bundle;
}

std::optional<std::uint32_t> resolve_level(const LevelBundle& bundle, const policy::AttributeSet& attrs) {
  for (const auto& rec : bundle.levels)
    if (policy::satisfies(rec.kem.tree, attrs)) return rec.level;
  return std::nullopt;
}

Recovered pmod_decrypt(const LevelBundle& bundle, const abe::PrivateKey& sk) {
  if (sk.ctx != bundle.ctx) throw ContextMismatch("key and bundle use different backends");
  const auto level = resolve_level(bundle, sk.attributes);
  if (!level) throw NoLevelSatisfied("no level satisfied by the key's attributes");
  const auto& ctx = *bundle.ctx;
  const auto start = ctx.op_counters();

  const auto& rec = bundle.levels.at(*level - 1);
  auto trace = abe::decrypt_traced(rec.kem, sk);
  Bytes key_bytes = aead_open(wrap_key(ctx, *level, trace.message), rec.wrapped_key, wrap_ad(*level));
  keychain::LevelKey key(*level, key_bytes);

  Recovered out;
  out.achieved_level = *level;
  out.abe_ops = trace.total_ops;
  out.abe_tree_ops = trace.tree_ops;
  for (std::size_t i = *level - 1; i < bundle.levels.size(); ++i) {
    if (i + 1 > *level) key = keychain::next(key);
    out.parts.push_back(partition::decrypt_part(bundle.levels[i].part, key));
  }
  out.view = partition::merge_parts(bundle.manifest.layout, *level, out.parts);
  out.total_ops = ctx.op_counters() - start;
  return out;
}

std::string manifest_json(const Manifest& m) {
  json levels = json::array();
  for (const auto& l : m.levels)
    levels.push_back({{"index", l.index}, {"label", l.label}, {"policy", l.policy}});
  json j{{"format", "pmod-bundle"},
         {"version", kVersion},
         {"k", m.k},
         {"spec_hash", m.spec_hash},
         {"backend", m.backend},
         {"created_at", m.created_at},
         {"layout", partition::to_json(m.layout)},
         {"levels", std::move(levels)}};
  return j.dump();
}

Bytes serialize(const LevelBundle& bundle) {
  ByteWriter w;
  w.raw(as_bytes(kMagic));
  w.u8(kVersion);
  w.str(manifest_json(bundle.manifest));
  w.u32(static_cast<std::uint32_t>(bundle.levels.size()));
  for (const auto& rec : bundle.levels) {
    w.u32(rec.level);
    w.blob(abe::serialize(rec.kem));
    w.raw(rec.wrapped_key.nonce);
    w.raw(rec.wrapped_key.tag);
    w.blob(rec.wrapped_key.ciphertext);
    w.blob(partition::serialize(rec.part));
  }
  return std::move(w).bytes();
}

LevelBundle deserialize_bundle(ByteView b) {
  ByteReader r(b);
  if (to_string(r.raw(kMagic.size())) != kMagic) throw FormatError("not a P-MOD bundle");
  if (r.u8() != kVersion) throw FormatError("unsupported bundle version");

  LevelBundle bundle;
  auto& m = bundle.manifest;
  try {
    auto j = json::parse(r.str());
    if (j.at("format").get<std::string>() != "pmod-bundle") throw FormatError("wrong manifest format");
    m.k = j.at("k").get<std::size_t>();
    m.spec_hash = j.at("spec_hash").get<std::string>();
    m.backend = j.at("backend").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.layout = partition::layout_from_json(j.at("layout"));
    for (const auto& l : j.at("levels"))
      m.levels.push_back({l.at("index").get<std::uint32_t>(), l.at("label").get<std::string>(),
                          l.at("policy").get<std::string>()});
  } catch (const json::exception& e) {
    throw FormatError(std::string("bundle manifest: ") + e.what());
  }
  try {
    bundle.ctx = PairingContext::from_backend_id(m.backend);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bundle backend: ") + e.what());
  }

  const auto n = r.u32();
  if (n != m.k || m.levels.size() != m.k || m.layout.k() != m.k || m.k == 0)
    throw FormatError("bundle level count is inconsistent");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto level = r.u32();
    if (level != i + 1 || m.levels[i].index != i + 1) throw FormatError("levels out of order");
    auto kem = abe::deserialize_ciphertext(bundle.ctx, r.blob());
    AeadSealed wrapped;
    auto copy = [&](auto& dst) {
      auto src = r.raw(dst.size());
      std::copy(src.begin(), src.end(), dst.begin());
    };
    copy(wrapped.nonce);
    copy(wrapped.tag);
    auto body = r.blob();
    wrapped.ciphertext.assign(body.begin(), body.end());
    auto part = partition::deserialize_part(r.blob());
    if (part.level != level) throw FormatError("part level does not match its record");
    try {
      if (!(policy::parse_policy(m.levels[i].policy) == kem.tree))
        throw FormatError("manifest policy differs from the embedded tree at level " + std::to_string(i + 1));
    } catch (const ParseError& e) {
      throw FormatError(std::string("manifest policy: ") + e.what());
    }
    LevelRecord rec{level, std::move(kem), std::move(wrapped), std::move(part)};
    bundle.levels.push_back(std::move(rec));
  }
  r.expect_done();
  if (spec_hash(m.levels) != m.spec_hash) throw FormatError("spec hash does not match the embedded trees");
  return bundle;
}

abe::ElementCounts count_elements(const LevelBundle& bundle) {
  abe::ElementCounts total;
  for (const auto& rec : bundle.levels) total += abe::count_elements(rec.kem);
  return total;
}

}  // namespace pmod::hierarchy
