// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-pmod-cli]

#include <sodium.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pmod/abe/abe.hpp"
#include "pmod/bench/bench.hpp"
#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/hierarchy/hierarchy.hpp"
#include "pmod/keychain/keychain.hpp"
#include "pmod/partition/csv.hpp"
#include "pmod/policy/policy_text.hpp"
#include "pmod/services/http.hpp"
#include "support/random_trees.hpp"
#include "support/run.hpp"
#include "support/temp_dir.hpp"

using namespace pmod;
using nlohmann::json;
using policy::AttributeSet;

namespace {

const mpz_class kBigPrime("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::size_t failures = 0;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (++failures <= 3) detail << (failures > 1 ? "; " : "") << what;
  }
};

using Check = std::function<void(Outcome&)>;

// ---- 1: round trips and the exponent oracle

Scalar exp_of(const PairingContext& ctx, const G0Element& x) { return ctx.known_exponent(x).value(); }
Scalar exp_of(const PairingContext& ctx, const G1Element& x) { return ctx.known_exponent(x).value(); }

// Interpolates the shares of a node's selected children at zero, using the
// share plan directly: the exponent every DecryptNode result must carry.
Scalar expected_node_exponent(const ScalarField& F, const abe::SharePlan& plan, const Scalar& r,
                              std::size_t node) {
  return F.mul(r, plan.constant_term(node));
}

void exponent_oracle(Outcome& o, RandomSource& rng, const policy::AccessTree& tree, const AttributeSet& attrs) {
  auto ctx = PairingContext::transparent(kBigPrime);
  const auto& F = ctx->field();
  const auto alpha = F.random(rng);
  const auto beta = F.random_nonzero(rng);
  auto [pk, mk] = abe::setup_with(ctx, alpha, beta);
  abe::KeyRandomness kr{F.random(rng), {}};
  for (const auto& a : attrs) kr.per_attribute.emplace(a, F.random(rng));
  auto sk = abe::keygen_with(mk, attrs, kr);

  auto h = [&](const std::string& a) { return exp_of(*ctx, ctx->hash_to_g0(a)); };
  o.expect(exp_of(*ctx, pk.B) == beta, "B != g^beta");
  o.expect(exp_of(*ctx, pk.B_inv) == F.inv(beta), "B_inv != g^(1/beta)");
  o.expect(exp_of(*ctx, pk.egg_alpha) == alpha, "egg_alpha");
  o.expect(exp_of(*ctx, mk.g_alpha) == alpha, "g_alpha");
  o.expect(exp_of(*ctx, sk.D) == F.div(F.add(alpha, kr.r), beta), "D != (alpha + r) / beta");
  for (const auto& [a, ra] : kr.per_attribute) {
    const auto& c = sk.components.at(a);
    o.expect(exp_of(*ctx, c.D) == F.add(kr.r, F.mul(h(a), ra)), "D_j != r + h(j) r_j");
    o.expect(exp_of(*ctx, c.D_prime) == ra, "D'_j != r_j");
  }

  const auto s = F.random(rng);
  auto plan = abe::share_secret(F, tree, s, rng);
  o.expect(plan.constant_term(0) == s, "root share != s");
  const auto mexp = F.random(rng);
  const auto m = ctx->exp(ctx->pair(ctx->generator(), ctx->generator()), mexp);
  auto ct = abe::encrypt_with_plan(pk, m, tree, plan);
  o.expect(exp_of(*ctx, ct.C_tilde) == F.add(mexp, F.mul(alpha, s)), "C~ != m e(g,g)^(alpha s)");
  o.expect(exp_of(*ctx, ct.C) == F.mul(beta, s), "C != h^s");
  for (const auto* leaf : tree.leaves()) {
    const auto q = plan.constant_term(leaf->id());
    const auto& lc = ct.leaves.at(leaf->id());
    o.expect(exp_of(*ctx, lc.C) == q, "C_y != g^q_y(0)");
    o.expect(exp_of(*ctx, lc.C_prime) == F.mul(h(leaf->attribute()), q), "C'_y != H(att)^q_y(0)");
  }
  // Every gate share is its parent's polynomial at the child's index.
  for (std::size_t id = 0; id < tree.node_count(); ++id) {
    if (id == 0) continue;
    const auto parent = tree.parent(id);
    const auto& siblings = tree.node(parent).children();
    std::size_t index = 0;
    for (std::size_t c = 0; c < siblings.size(); ++c)
      if (siblings[c].id() == id) index = c + 1;
    const auto& poly = plan.polynomial(parent);
    Scalar v = F.zero();
    for (std::size_t d = poly.size(); d-- > 0;) v = F.add(F.mul(v, F.from_u64(index)), poly[d]);
    o.expect(plan.constant_term(id) == v, "child share != q_parent(index)");
    o.expect(plan.polynomial(id).size() == tree.node(id).threshold(), "polynomial degree != k_x - 1");
  }

  auto sel = policy::satisfies(tree, attrs);
  if (!sel) {
    o.expect(false, "oracle set does not satisfy tree");
    return;
  }
  for (auto id : sel->leaves) {
    auto v = abe::decrypt_node(ct, sk, id, *sel);
    o.expect(v && exp_of(*ctx, *v) == expected_node_exponent(F, plan, kr.r, id), "leaf DecryptNode");
  }
  for (auto id : sel->interior) {
    auto v = abe::decrypt_node(ct, sk, id, *sel);
    o.expect(v && exp_of(*ctx, *v) == expected_node_exponent(F, plan, kr.r, id), "gate DecryptNode");
  }
  auto root = abe::decrypt_node(ct, sk, 0, *sel);
  o.expect(root && exp_of(*ctx, *root) == F.mul(kr.r, s), "A != e(g,g)^(r s)");
  o.expect(exp_of(*ctx, ctx->pair(ct.C, sk.D)) == F.mul(s, F.add(alpha, kr.r)), "e(C, D)");
  o.expect(abe::decrypt(ct, sk) == m, "message not recovered");
}

void criterion_1(Outcome& o) {
  SeededRandom rng(1001);
  std::size_t done = 0;
  for (auto ctx : {PairingContext::transparent(kBigPrime), PairingContext::bls12_381()}) {
    auto [pk, mk] = abe::setup(ctx, rng);
    for (int t = 0; t < 200; ++t) {
      auto tree = testing::random_tree(rng, 12, 8);
      auto attrs = testing::random_satisfying_set(rng, tree);
      auto sk = abe::keygen(mk, attrs, rng);
      auto m = ctx->random_g1(rng);
      auto ct = abe::encrypt(pk, m, tree, rng);
      auto again = abe::deserialize_ciphertext(ctx, abe::serialize(ct));
      o.expect(abe::decrypt(again, sk) == m, ctx->backend_id().substr(0, 11) + " round trip");
      ++done;
    }
  }
  for (int t = 0; t < 200; ++t) {
    auto tree = testing::random_tree(rng, 12, 8);
    exponent_oracle(o, rng, tree, testing::random_satisfying_set(rng, tree));
  }
  o.detail << (o.pass ? "" : "; ") << done << " round trips, 200 oracle checks";
}

// ---- 2: soundness

void criterion_2(Outcome& o) {
  SeededRandom rng(2002);
  auto ctx = PairingContext::transparent(kBigPrime);
  auto [pk, mk] = abe::setup(ctx, rng);
  int refused = 0;
  while (refused < 200) {
    auto tree = testing::random_tree(rng, 12, 8);
    auto attrs = testing::random_unsatisfying_set(rng, tree);
    if (!attrs) continue;
    auto ct = abe::encrypt(pk, ctx->random_g1(rng), tree, rng);
    auto sk = abe::keygen(mk, *attrs, rng);
    try {
      abe::decrypt(ct, sk);
      o.expect(false, "non-satisfying key decrypted");
    } catch (const PolicyNotSatisfied&) {
    }
    ++refused;
  }
  for (int t = 0; t < 500; ++t) {
    auto tree = testing::random_tree(rng, 10, 6);
    AttributeSet attrs;
    for (std::size_t a = 0; a < 6; ++a)
      if (rng.uniform(2)) attrs.insert(testing::attr_name(a));
    auto got = policy::satisfies(tree, attrs);
    auto best = testing::brute_min_leaves(tree, attrs);
    o.expect(got.has_value() == best.has_value(), "presence disagrees with brute force");
    if (got && best) o.expect(got->leaf_count() == *best, "minimal leaf count disagrees");
  }
  o.detail << (o.pass ? "" : "; ") << "200 refusals, 500 brute-force cases";
}

// ---- 3: collusion

void criterion_3(Outcome& o) {
  SeededRandom rng(3003);
  auto ctx = PairingContext::transparent(kBigPrime);
  auto tree = policy::parse_policy("A AND B");
  int resisted = 0;
  for (int t = 0; t < 100; ++t) {
    auto [pk, mk] = abe::setup(ctx, rng);
    auto m = ctx->random_g1(rng);
    auto ct = abe::encrypt(pk, m, tree, rng);
    auto alice = abe::keygen(mk, AttributeSet{"A"}, rng);
    auto bob = abe::keygen(mk, AttributeSet{"B"}, rng);
    bool broken = false;
    for (const auto* base : {&alice, &bob}) {
      abe::PrivateKey hybrid = *base;
      hybrid.components = {{"A", alice.components.at("A")}, {"B", bob.components.at("B")}};
      hybrid.attributes = AttributeSet{"A", "B"};
      if (abe::decrypt(ct, hybrid) == m) broken = true;
    }
    if (!broken) ++resisted;
  }
  o.expect(resisted == 100, "hybrid key recovered m");
  o.detail << (o.pass ? "" : "; ") << resisted << "/100 instances resisted";
}

// ---- 4: downward closure

AttributeSet level_user(std::size_t i) {
  return AttributeSet{"L" + std::to_string(i) + "a", "L" + std::to_string(i) + "b"};
}

void criterion_4(Outcome& o) {
  auto ctx = PairingContext::transparent(kBigPrime);
  std::size_t refusals = 0;
  for (std::size_t k : {3u, 6u, 9u}) {
    SeededRandom rng(4000 + k);
    auto [pk, mk] = abe::setup(ctx, rng);
    std::vector<std::string> policies;
    for (std::size_t i = 1; i <= k; ++i)
      policies.push_back("L" + std::to_string(i) + "a AND L" + std::to_string(i) + "b");
    auto spec = hierarchy::make_spec(policies, partition::census_plan(k));
    const auto csv = partition::write_csv(partition::generate_census(12, rng));
    auto bundle = hierarchy::pmod_encrypt(pk, csv, spec, rng);
    auto expected = partition::partition(csv, spec.plan);
    for (std::size_t i = 1; i <= k; ++i) {
      auto sk = abe::keygen(mk, level_user(i), rng);
      auto got = hierarchy::pmod_decrypt(bundle, sk);
      o.expect(got.achieved_level == i, "wrong level");
      o.expect(got.parts.size() == k - i + 1, "wrong number of parts");
      for (std::size_t j = i; j <= k && j - i < got.parts.size(); ++j)
        o.expect(got.parts[j - i] == expected.parts[j - 1], "part mismatch");

      const auto& rec = bundle.levels[i - 1];
      Bytes ad{'p', 'm', 'o', 'd', '-', 'w', 'r', 'a', 'p', 0, 0, 0, static_cast<std::uint8_t>(i)};
      keychain::LevelKey sk_i(static_cast<std::uint32_t>(i),
                              aead_open(hierarchy::wrap_key(*ctx, rec.level, abe::decrypt(rec.kem, sk)),
                                        rec.wrapped_key, ad));
      for (std::size_t j = i; j <= k; ++j) {
        auto derived = keychain::chain_from(sk_i, static_cast<std::uint32_t>(j));
        for (std::size_t p = 1; p < i; ++p) {
          const auto& ep = bundle.levels[p - 1].part;
          for (const auto& attempt : {keychain::LevelKey(ep.level, derived.bytes()), derived}) {
            try {
              partition::decrypt_part(ep, attempt);
              o.expect(false, "derived key opened a higher part");
            } catch (const AuthenticationFailure&) {
              ++refusals;
            }
          }
        }
      }
    }
  }
  o.detail << (o.pass ? "" : "; ") << "k = 3, 6, 9; " << refusals << " upward attempts refused";
}

// ---- 5: operation counts

void criterion_5(Outcome& o) {
  SeededRandom rng(5005);
  auto ctx = PairingContext::transparent(kBigPrime);
  const bench::RunOptions opts{1, 4, true};
  std::size_t a_reading = 0, chosen = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 1 + rng.uniform(9);
    const std::size_t n = k + rng.uniform(61 - k);
    auto counts = bench::sampled_split(n, k, rng);
    std::size_t sum_y = 0, sum_x = 0, running = 0;
    for (auto c : counts) {
      sum_y += c;
      running += c;
      sum_x += running;  // level i's baseline tree holds levels 1..i
    }
    auto p = bench::run_scenario(bench::make_scenario(k, n, bench::Scheme::pmod, 500 + t, counts), ctx, opts);
    auto b =
        bench::run_scenario(bench::make_scenario(k, n, bench::Scheme::cpabe_case1, 500 + t, counts), ctx, opts);
    o.expect(p.encrypt.ops.g0_ops == 2 * sum_y + k, "P-MOD encrypt f_G0 != 2 sum|Y_i| + k");
    o.expect(b.encrypt.ops.g0_ops == 2 * sum_x + k, "baseline encrypt f_G0 != 2 sum|X_i| + k");
    o.expect(p.decrypt_tree_pairings == 2 * p.chosen_leaves, "P-MOD pairings != 2 chosen leaves");
    o.expect(p.decrypt_tree_pairings <= 2 * p.user_attributes, "P-MOD pairings > 2|A_j|");
    a_reading += p.user_attributes;
    chosen += p.chosen_leaves;
  }
  o.detail << (o.pass ? "" : "; ") << "50 scenarios; |A_j| read as the user's attribute count (sum " << a_reading
           << ", chosen leaves sum " << chosen << ")";
}

// ---- 6: storage census

void criterion_6(Outcome& o) {
  auto ctx = PairingContext::bls12_381();
  SeededRandom rng(6006);
  auto [pk, mk] = abe::setup(ctx, rng);
  o.expect(bench::census_public_key(abe::serialize(pk)) == abe::ElementCounts{3, 1, 0}, "PK");
  o.expect(bench::census_master_key(abe::serialize(mk)) == abe::ElementCounts{1, 0, 1}, "MK");
  for (std::size_t n : {1u, 4u, 11u}) {
    AttributeSet attrs;
    for (std::size_t a = 0; a < n; ++a) attrs.insert("u" + std::to_string(a));
    auto sk = abe::keygen(mk, attrs, rng);
    o.expect(bench::census_private_key(abe::serialize(sk)) == abe::ElementCounts{2 * n + 1, 0, 0}, "SK");
  }
  for (auto counts : {std::vector<std::size_t>{2, 3}, std::vector<std::size_t>{1, 1, 1, 2, 2, 2}}) {
    std::size_t sum = 0;
    for (auto c : counts) sum += c;
    const auto k = counts.size();
    auto s = bench::make_scenario(k, sum, bench::Scheme::pmod, 1, counts);
    auto csv = partition::write_csv(partition::generate_census(4, rng));
    auto bundle = hierarchy::pmod_encrypt(pk, csv, bench::scenario_spec(s), rng);
    o.expect(bench::census_bundle(hierarchy::serialize(bundle)) == abe::ElementCounts{2 * sum + k, k, 0},
             "bundle");
  }
  o.detail << (o.pass ? "" : "; ") << "PK, MK, SK (3 sizes), bundles k = 2, 6";
}

// ---- 7: timing trend on the production backend

void criterion_7(Outcome& o) {
  auto ctx = PairingContext::bls12_381();
  const bench::RunOptions opts{5, 200, false};
  for (std::size_t k : {3u, 6u}) {
    for (std::size_t n : {30u, 60u}) {
      auto p = bench::run_scenario(bench::make_scenario(k, n, bench::Scheme::pmod), ctx, opts);
      auto b = bench::run_scenario(bench::make_scenario(k, n, bench::Scheme::cpabe_case1), ctx, opts);
      const double ratio = p.keygen.median_ms / b.keygen.median_ms;
      const double lo = 0.6 / static_cast<double>(k), hi = 1.6 / static_cast<double>(k);
      std::ostringstream at;
      at << "k=" << k << " N=" << n;
      o.expect(ratio >= lo && ratio <= hi, at.str() + " keygen ratio " + std::to_string(ratio));
      o.expect(p.encrypt.median_ms < b.encrypt.median_ms, at.str() + " encrypt not faster");
      o.expect(p.decrypt.median_ms < b.decrypt.median_ms, at.str() + " decrypt not faster");
      o.detail << (o.detail.tellp() > 0 ? "; " : "") << at.str() << " keygen ratio " << std::fixed
               << std::setprecision(3) << ratio << " enc " << p.encrypt.median_ms << "/" << b.encrypt.median_ms
               << " dec " << p.decrypt.median_ms << "/" << b.decrypt.median_ms << " ms";
    }
  }
}

// ---- 8: hash chain

void criterion_8(Outcome& o) {
  keychain::LevelKey zero(1, keychain::LevelKey::Material{});
  const char* frozen[] = {"66687aadf862bd776c8fc18b8e9f8e20089714856ee233b3902a591d0d5f2925",
                          "2b32db6c2c0a6235fb1397e8225ea85e0f0e6e8c7b126d0016ccbde0e667151e",
                          "12771355e46cd47c71ed1721fd5319b383cca3a1f9fce3aa1c8cd3bd37af20d7"};
  keychain::LevelKey::Material ref{};
  for (std::uint32_t step = 0; step < 3; ++step) {
    crypto_hash_sha256(ref.data(), ref.data(), ref.size());
    auto got = keychain::chain_from(zero, step + 2);
    o.expect(to_hex(got.bytes()) == frozen[step], "frozen vector");
    o.expect(got.bytes() == ref, "reference SHA-256 disagrees");
  }
  SeededRandom rng(8008);
  for (int t = 0; t < 1000; ++t) {
    auto root = keychain::generate_root(rng);
    const auto a = 1 + static_cast<std::uint32_t>(rng.uniform(6));
    const auto b = a + static_cast<std::uint32_t>(rng.uniform(6));
    const auto c = b + static_cast<std::uint32_t>(rng.uniform(6));
    auto via = keychain::chain_from(keychain::chain_from(keychain::chain_from(root, a), b), c);
    o.expect(via == keychain::chain_from(root, c), "composition");
    auto x = root.bytes();
    for (std::uint32_t s = 1; s < c; ++s) crypto_hash_sha256(x.data(), x.data(), x.size());
    o.expect(via.bytes() == x, "reference chain disagrees");
  }
  o.detail << (o.pass ? "" : "; ") << "3 frozen vectors, 1000 roots";
}

// ---- 9: services and the CLI

std::vector<std::string> encodings(ByteView b) {
  return {std::string(b.begin(), b.end()), to_hex(b), base64_encode(b)};
}

void criterion_9(Outcome& o, const std::string& cli) {
  if (cli.empty()) {
    o.expect(false, "no CLI path given");
    return;
  }
  testing::TempDir dir;
  auto p = [&](const std::string& n) { return (dir / n).string(); };
  auto run = [&](std::vector<std::string> args) { return testing::run(cli, args, dir.path()); };
  setenv("PMOD_PASSPHRASE", "acceptance passphrase", 1);
  setenv("PMOD_TOKEN", "acceptance-token", 1);

  auto r = run({"setup", "--out", p("state"), "--kdf-iterations", "20000"});
  o.expect(r.exit_code == 0, "setup: " + r.err);
  if (!o.pass) return;

  auto issuer = services::KeyIssuer::open(p("state"), "acceptance passphrase",
                                          services::IssuerOptions{"acceptance-token", 1, std::nullopt});
  std::mutex mu;
  std::string store_traffic;
  services::FsBundleStore store(dir / "store");
  services::IssuerService issuer_http(issuer);
  services::StoreService store_http(store, "127.0.0.1", 0,
                                    [&](const std::string& method, const std::string& path,
                                        const std::string& req, const std::string& resp) {
                                      std::lock_guard lock(mu);
                                      store_traffic += method + " " + path + "\n" + req + "\n" + resp + "\n";
                                    });

  const std::string spec = R"spec({"levels":[
    {"index":1,"policy":"physician AND (oncology OR cardiology)","label":"identifying"},
    {"index":2,"policy":"physician OR T(2; researcher, irb_approved, trained)","label":"clinical"},
    {"index":3,"policy":"staff OR physician OR researcher","label":"aggregate"}],
    "partition":{"mode":"column_groups","groups":[["ssn","name"],["age","education","occupation"],
      ["workclass","marital_status","race","native_country"]]}})spec";
  std::ofstream(dir / "spec.json") << spec;
  SeededRandom data(9);
  auto canonical = partition::write_csv(partition::generate_census(25, data));
  std::string crlf;
  for (char c : canonical) crlf += c == '\n' ? std::string("\r\n") : std::string(1, c);
  std::ofstream(dir / "input.csv", std::ios::binary) << crlf;

  r = run({"keygen", "--issuer", issuer_http.url(), "--attr", "physician", "--attr", "oncology", "--out",
           p("top.key"), "--requester", "dr-a"});
  o.expect(r.exit_code == 0, "keygen top: " + r.err);
  r = run({"keygen", "--issuer", issuer_http.url(), "--attr", "researcher", "--attr", "trained", "--out",
           p("mid.key"), "--requester", "res-b"});
  o.expect(r.exit_code == 0, "keygen mid: " + r.err);
  r = run({"encrypt", "--issuer", issuer_http.url(), "--spec", p("spec.json"), "--in", p("input.csv"), "--out",
           p("bundle.pmod")});
  o.expect(r.exit_code == 0, "encrypt: " + r.err);
  r = run({"put", "--store", store_http.url(), p("bundle.pmod")});
  o.expect(r.exit_code == 0, "put: " + r.err);
  const auto id = r.out.substr(0, r.out.find('\n'));
  r = run({"get", "--store", store_http.url(), id, "--out", p("fetched.pmod")});
  o.expect(r.exit_code == 0, "get: " + r.err);
  r = run({"decrypt", "--key", p("top.key"), "--bundle", p("fetched.pmod"), "--out", p("recovered.csv")});
  o.expect(r.exit_code == 0, "decrypt: " + r.err);
  if (!o.pass) return;
  o.expect(testing::slurp(dir / "recovered.csv") == canonical, "recovered file differs from canonical input");
  o.expect(testing::slurp(dir / "fetched.pmod") == testing::slurp(dir / "bundle.pmod"), "store altered bundle");

  r = run({"--json", "decrypt", "--key", p("mid.key"), "--bundle", p("fetched.pmod")});
  o.expect(r.exit_code == 0 && json::parse(r.out).at("achieved_level") == 2, "mid-level user");

  // Candidate key material: both private keys and their elements, the public
  // key and its elements, and every level key and wrap key, raw, hex and
  // base64, searched in the raw traffic and in the decoded bundle payloads.
  std::vector<Bytes> secrets;
  auto bundle = hierarchy::deserialize_bundle(services::read_file(dir / "bundle.pmod"));
  const auto& ctx = *bundle.ctx;
  for (const char* name : {"top.key", "mid.key"}) {
    auto bytes = services::read_file(dir / name);
    secrets.push_back(bytes);
    auto sk = abe::deserialize_private_key(bytes);
    secrets.push_back(ctx.serialize(sk.D));
    for (const auto& [a, c] : sk.components) {
      secrets.push_back(ctx.serialize(c.D));
      secrets.push_back(ctx.serialize(c.D_prime));
    }
  }
  auto pk = issuer.public_key();
  secrets.push_back(abe::serialize(pk));
  for (const auto* e : {&pk.B, &pk.B_inv}) secrets.push_back(ctx.serialize(*e));
  secrets.push_back(ctx.serialize(pk.egg_alpha));
  auto top = abe::deserialize_private_key(services::read_file(dir / "top.key"));
  const auto& rec = bundle.levels[0];
  const auto z = abe::decrypt(rec.kem, top);
  const auto wk = hierarchy::wrap_key(ctx, 1, z);
  secrets.emplace_back(wk.begin(), wk.end());
  secrets.push_back(ctx.serialize(z));
  Bytes ad{'p', 'm', 'o', 'd', '-', 'w', 'r', 'a', 'p', 0, 0, 0, 1};
  keychain::LevelKey root(1, aead_open(wk, rec.wrapped_key, ad));
  for (std::uint32_t j = 1; j <= bundle.manifest.k; ++j) {
    auto key = keychain::chain_from(root, j);
    secrets.emplace_back(key.bytes().begin(), key.bytes().end());
  }

  std::string haystack;
  {
    std::lock_guard lock(mu);
    haystack = store_traffic;
  }
  o.expect(haystack.find("PMODBNDL") == std::string::npos, "bundle travelled unencoded");
  std::string decoded;
  std::istringstream lines(haystack);
  for (std::string line; std::getline(lines, line);) {
    try {
      auto j = json::parse(line);
      if (j.is_object() && j.contains("bundle")) decoded += to_string(base64_decode(j["bundle"].get<std::string>()));
    } catch (const std::exception&) {
    }
  }
  o.expect(decoded.find("PMODBNDL") != std::string::npos, "observer saw no bundle payload");
  std::size_t needles = 0;
  for (const auto& s : secrets) {
    for (const auto& enc : encodings(s)) {
      ++needles;
      o.expect(haystack.find(enc) == std::string::npos, "key material in store traffic");
      o.expect(decoded.find(enc) == std::string::npos, "key material in decoded bundle");
    }
  }
  o.detail << (o.pass ? "" : "; ") << "setup/keygen/encrypt/put/get/decrypt via CLI; " << needles
           << " encodings absent from " << haystack.size() << " bytes of store traffic";
}

}  // namespace

int main(int argc, char** argv) {
  if (sodium_init() < 0) return 1;
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, Check>> criteria = {
      {"round trips and exponent oracle", criterion_1},
      {"policy soundness", criterion_2},
      {"collusion resistance", criterion_3},
      {"hierarchy downward closure", criterion_4},
      {"operation counts", criterion_5},
      {"storage census", criterion_6},
      {"timing trend", criterion_7},
      {"hash-chain vectors", criterion_8},
      {"service flow", [&](Outcome& o) { criterion_9(o, cli); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << " ("
              << std::fixed << std::setprecision(1) << secs << "s): " << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
