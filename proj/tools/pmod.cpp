// pmod: command-line front end for setup, key issuance, bundle encryption and
// decryption, inspection, benchmarks and the HTTP services.

#include <CLI11.hpp>
#include <httplib.h>
#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "pmod/bench/bench.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/hierarchy/hierarchy.hpp"
#include "pmod/partition/csv.hpp"
#include "pmod/policy/policy_text.hpp"
#include "pmod/services/http.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pmod;

namespace {

constexpr const char* kDefaultTransparent =
    "transparent:52435875175126190479447740508185965837690552500527637822603658699938581184513";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json = false;
  std::string backend = "bls12-381";
  std::optional<std::uint64_t> seed;
  bool insecure_seed = false;
};

ContextPtr context_for(const std::string& backend) {
  if (backend == "transparent") return PairingContext::from_backend_id(kDefaultTransparent);
  try {
    return PairingContext::from_backend_id(backend);
  } catch (const Error&) {
    throw UsageError("unknown backend '" + backend + "' (use bls12-381, transparent or transparent:<prime>)");
  }
}

// Seeds are for tests and golden files. They are refused on the production
// backend unless --insecure-seed says the operator means it.
std::unique_ptr<RandomSource> make_rng(const Globals& g, const std::string& backend_id) {
  if (!g.seed) return std::make_unique<SystemRandom>();
  if (backend_id.rfind("transparent", 0) != 0 && !g.insecure_seed)
    throw UsageError("--seed is only honored with a transparent backend or --insecure-seed");
  return std::make_unique<SeededRandom>(*g.seed);
}

std::string read_text(const fs::path& p) {
  auto b = services::read_file(p);
  return to_string(b);
}

void write_public_file(const fs::path& p, ByteView b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("cannot write " + p.string());
}

std::string passphrase(const std::string& file) {
  if (!file.empty()) {
    auto text = read_text(file);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
  }
  if (const char* env = std::getenv("PMOD_PASSPHRASE")) return env;
  throw UsageError("a passphrase is required: --passphrase-file or PMOD_PASSPHRASE");
}

std::string token_value(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PMOD_TOKEN")) return env;
  return {};
}

void emit(const Globals& g, const json& j, const std::string& human) {
  if (g.json)
    std::cout << j.dump() << '\n';
  else
    std::cout << human;
}

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

volatile sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmod: privilege-leveled attribute-based encryption of tabular files"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable JSON on stdout");
  app.add_option("--backend", g.backend, "bls12-381 (default), transparent or transparent:<prime>");
  app.add_option("--seed", g.seed, "Deterministic randomness (tests only)");
  app.add_flag("--insecure-seed", g.insecure_seed, "Allow --seed on the production backend");

  // setup
  auto* setup = app.add_subcommand("setup", "Create issuer state: public key and sealed master key");
  std::string setup_out, pass_file;
  std::uint32_t kdf_iterations = 200000;
  setup->add_option("--out", setup_out, "State directory")->required();
  setup->add_option("--passphrase-file", pass_file, "File holding the issuer passphrase");
  setup->add_option("--kdf-iterations", kdf_iterations, "PBKDF2 rounds for issuer.key")
      ->check(CLI::Range(1u, 100000000u));

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Issue a private key for a set of attributes");
  std::vector<std::string> attrs;
  std::string key_out, keygen_state, issuer_url, token_flag, requester = "cli";
  keygen->add_option("--attr", attrs, "Attribute (repeatable)")->required();
  keygen->add_option("--out", key_out, "Where to write the private key")->required();
  auto* kg_state = keygen->add_option("--state", keygen_state, "Issue locally from a state directory");
  auto* kg_issuer = keygen->add_option("--issuer", issuer_url, "Issue through an issuer service URL");
  kg_state->excludes(kg_issuer);
  keygen->add_option("--passphrase-file", pass_file, "Issuer passphrase (with --state)");
  keygen->add_option("--token", token_flag, "Bearer token (or PMOD_TOKEN)");
  keygen->add_option("--requester", requester, "Requester id recorded in the issuance log");

  // encrypt
  auto* encrypt = app.add_subcommand("encrypt", "Partition a CSV file and encrypt it into a bundle");
  std::string spec_file, in_file, bundle_out, pk_file, enc_state, created_at;
  encrypt->add_option("--spec", spec_file, "Hierarchy spec (JSON)")->required()->check(CLI::ExistingFile);
  encrypt->add_option("--in", in_file, "Input CSV")->required()->check(CLI::ExistingFile);
  encrypt->add_option("--out", bundle_out, "Bundle path")->required();
  auto* enc_pk = encrypt->add_option("--pk", pk_file, "Public key file");
  auto* enc_st = encrypt->add_option("--state", enc_state, "State directory holding issuer.pub");
  auto* enc_iss = encrypt->add_option("--issuer", issuer_url, "Fetch the public key from an issuer service");
  enc_pk->excludes(enc_st)->excludes(enc_iss);
  enc_st->excludes(enc_iss);
  encrypt->add_option("--created-at", created_at, "Manifest timestamp (default: now)");

  // decrypt
  auto* decrypt = app.add_subcommand("decrypt", "Recover the parts a key is entitled to");
  std::string key_file, bundle_file, dec_out, parts_dir;
  decrypt->add_option("--key", key_file, "Private key file")->required()->check(CLI::ExistingFile);
  decrypt->add_option("--bundle", bundle_file, "Bundle file")->required()->check(CLI::ExistingFile);
  decrypt->add_option("--out", dec_out, "Write the recovered view here (default: stdout)");
  decrypt->add_option("--parts-dir", parts_dir, "Also write each recovered part as part-<i>.csv");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Show a bundle's manifest, policies and element counts");
  std::string inspect_file;
  inspect->add_option("bundle", inspect_file, "Bundle file")->required()->check(CLI::ExistingFile);

  // bench
  auto* bench = app.add_subcommand("bench", "Measure operation counts and timings, P-MOD vs baseline");
  std::vector<std::size_t> bench_k{3}, bench_n{30};
  std::string scheme = "both", report_out;
  std::size_t iterations = 5, rows = 200;
  bool counts_only_flag = false;
  bench->add_option("--k", bench_k, "Level counts (repeatable)")->delimiter(',');
  bench->add_option("--n", bench_n, "Attribute totals (repeatable)")->delimiter(',');
  bench->add_option("--scheme", scheme, "pmod, cpabe_case1 or both")
      ->check(CLI::IsMember({"pmod", "cpabe_case1", "both"}));
  bench->add_option("--out", report_out, "CSV report path");
  bench->add_flag("--counts-only", counts_only_flag, "Single iteration; counts are exact either way");
  bench->add_option("--iterations", iterations, "Runs per phase (median reported)")->check(CLI::PositiveNumber);
  bench->add_option("--rows", rows, "Synthetic census rows")->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the issuer and/or store HTTP services");
  std::string serve_state, serve_store, host = "127.0.0.1";
  int issuer_port = 8470, store_port = 8471;
  serve->add_option("--state", serve_state, "Issuer state directory (enables the issuer)");
  serve->add_option("--store", serve_store, "Store root directory (enables the store)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--issuer-port", issuer_port, "Issuer port (0 = any)");
  serve->add_option("--store-port", store_port, "Store port (0 = any)");
  serve->add_option("--passphrase-file", pass_file, "Issuer passphrase");
  serve->add_option("--token", token_flag, "Bearer token required by POST /v1/keys (or PMOD_TOKEN)");

  // put / get
  auto* put = app.add_subcommand("put", "Upload a bundle to a store (URL or directory)");
  std::string store_loc, put_file;
  put->add_option("--store", store_loc, "Store URL or directory")->required();
  put->add_option("bundle", put_file, "Bundle file")->required()->check(CLI::ExistingFile);
  auto* get = app.add_subcommand("get", "Download a bundle by id");
  std::string get_id, get_out;
  get->add_option("--store", store_loc, "Store URL or directory")->required();
  get->add_option("id", get_id, "Bundle id")->required();
  get->add_option("--out", get_out, "Where to write the bundle")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*setup) {
      auto ctx = context_for(g.backend);
      auto rng = make_rng(g, ctx->backend_id());
      auto issuer = services::KeyIssuer::initialize(setup_out, ctx, passphrase(pass_file), *rng,
                                                    services::IssuerOptions{"", kdf_iterations, g.seed});
      const auto pub = fs::path(setup_out) / "issuer.pub";
      emit(g, {{"state", setup_out}, {"backend", ctx->backend_id()}, {"public_key", pub.string()}},
           "initialized " + setup_out + " (" + ctx->backend_id() + ")\n");
    } else if (*keygen) {
      policy::AttributeSet set(attrs);
      abe::PrivateKey sk;
      if (!keygen_state.empty()) {
        // Local issuance: the operator holds the passphrase, so the token is
        // generated for this call only.
        const std::string once = "local";
        auto issuer = services::KeyIssuer::open(keygen_state, passphrase(pass_file),
                                                services::IssuerOptions{once, 1, g.seed});
        if (g.seed) make_rng(g, issuer.public_key().ctx->backend_id());
        sk = issuer.issue_key(requester, set, once);
      } else if (!issuer_url.empty()) {
        if (g.seed) throw UsageError("--seed has no effect on a remote issuer");
        sk = services::IssuerClient(issuer_url).issue(requester, set, token_value(token_flag));
      } else {
        throw UsageError("keygen needs --state or --issuer");
      }
      services::write_secret_file(key_out, abe::serialize(sk));
      emit(g, {{"key", key_out}, {"fingerprint", services::key_fingerprint(sk)}, {"attributes", attrs}},
           "wrote " + key_out + " (fingerprint " + services::key_fingerprint(sk) + ")\n");
    } else if (*encrypt) {
      abe::PublicKey pk;
      if (!pk_file.empty())
        pk = abe::deserialize_public_key(services::read_file(pk_file));
      else if (!enc_state.empty())
        pk = abe::deserialize_public_key(services::read_file(fs::path(enc_state) / "issuer.pub"));
      else if (!issuer_url.empty())
        pk = services::IssuerClient(issuer_url).params();
      else
        throw UsageError("encrypt needs --pk, --state or --issuer");
      auto spec = hierarchy::parse_spec(read_text(spec_file));
      auto rng = make_rng(g, pk.ctx->backend_id());
      auto bundle = hierarchy::pmod_encrypt(pk, read_text(in_file), spec, *rng, {created_at});
      auto bytes = hierarchy::serialize(bundle);
      write_public_file(bundle_out, bytes);
      emit(g, {{"bundle", bundle_out}, {"k", bundle.manifest.k}, {"id", to_hex(sha256(bytes))}},
           "wrote " + bundle_out + " (k = " + std::to_string(bundle.manifest.k) + ")\n");
    } else if (*decrypt) {
      auto sk = abe::deserialize_private_key(services::read_file(key_file));
      auto bundle = hierarchy::deserialize_bundle(services::read_file(bundle_file));
      auto got = hierarchy::pmod_decrypt(bundle, sk);
      if (!parts_dir.empty()) {
        fs::create_directories(parts_dir);
        for (std::size_t i = 0; i < got.parts.size(); ++i)
          write_public_file(fs::path(parts_dir) / ("part-" + std::to_string(got.achieved_level + i) + ".csv"),
                            got.parts[i]);
      }
      const json summary{{"achieved_level", got.achieved_level},
                         {"k", bundle.manifest.k},
                         {"parts", got.parts.size()},
                         {"pairings", got.total_ops.pairings}};
      if (!dec_out.empty()) {
        write_public_file(dec_out, got.view);
        emit(g, summary, "level " + std::to_string(got.achieved_level) + " of " +
                             std::to_string(bundle.manifest.k) + ": wrote " + dec_out + "\n");
      } else if (g.json) {
        auto j = summary;
        j["view"] = to_string(got.view);
        std::cout << j.dump() << '\n';
      } else {
        std::cout << to_string(got.view);
      }
    } else if (*inspect) {
      auto bytes = services::read_file(inspect_file);
      auto bundle = hierarchy::deserialize_bundle(bytes);
      const auto& m = bundle.manifest;
      json levels = json::array();
      std::string human = "bundle " + to_hex(sha256(bytes)) + "\n  backend     " + m.backend +
                          "\n  created_at  " + m.created_at + "\n  spec_hash   " + m.spec_hash +
                          "\n  k           " + std::to_string(m.k) + "\n";
      for (std::size_t i = 0; i < m.k; ++i) {
        const auto& rec = bundle.levels[i];
        auto counts = abe::count_elements(rec.kem);
        levels.push_back({{"index", m.levels[i].index},
                          {"label", m.levels[i].label},
                          {"policy", m.levels[i].policy},
                          {"leaves", rec.kem.tree.leaf_count()},
                          {"g0", counts.g0},
                          {"g1", counts.g1},
                          {"part_bytes", rec.part.ciphertext.size()}});
        human += "  level " + std::to_string(m.levels[i].index) + "  leaves " +
                 std::to_string(rec.kem.tree.leaf_count()) + "  G0 " + std::to_string(counts.g0) + "  G1 " +
                 std::to_string(counts.g1) + "  " + m.levels[i].label + ": " + m.levels[i].policy + "\n";
      }
      auto total = hierarchy::count_elements(bundle);
      human += "  total       G0 " + std::to_string(total.g0) + "  G1 " + std::to_string(total.g1) + "\n";
      emit(g,
           {{"id", to_hex(sha256(bytes))},
            {"backend", m.backend},
            {"created_at", m.created_at},
            {"spec_hash", m.spec_hash},
            {"k", m.k},
            {"layout", partition::to_json(m.layout)},
            {"levels", levels},
            {"elements", {{"g0", total.g0}, {"g1", total.g1}}}},
           human);
    } else if (*bench) {
      auto ctx = context_for(g.backend);
      if (g.seed) make_rng(g, ctx->backend_id());
      std::vector<bench::Scheme> schemes;
      if (scheme != "cpabe_case1") schemes.push_back(bench::Scheme::pmod);
      if (scheme != "pmod") schemes.push_back(bench::Scheme::cpabe_case1);
      std::vector<bench::BenchReport> reports;
      for (auto k : bench_k)
        for (auto n : bench_n)
          for (auto s : schemes)
            reports.push_back(bench::run_scenario(bench::make_scenario(k, n, s, g.seed.value_or(1)), ctx,
                                                  {iterations, rows, counts_only_flag}));
      auto out = bench::emit_report(reports);
      if (!report_out.empty()) write_public_file(report_out, as_bytes(out.csv));
      if (g.json)
        std::cout << json{{"csv", out.csv}}.dump() << '\n';
      else
        std::cout << out.table;
    } else if (*serve) {
      if (serve_state.empty() && serve_store.empty()) throw UsageError("serve needs --state and/or --store");
      std::optional<services::KeyIssuer> issuer;
      std::optional<services::FsBundleStore> store;
      std::unique_ptr<services::IssuerService> issuer_http;
      std::unique_ptr<services::StoreService> store_http;
      json info = json::object();
      if (!serve_state.empty()) {
        const auto token = token_value(token_flag);
        if (token.empty()) throw UsageError("serve --state needs --token or PMOD_TOKEN");
        issuer.emplace(services::KeyIssuer::open(serve_state, passphrase(pass_file),
                                                 services::IssuerOptions{token, 1, std::nullopt}));
        issuer_http = std::make_unique<services::IssuerService>(*issuer, host, issuer_port);
        info["issuer"] = "http://" + host + ":" + std::to_string(issuer_http->port());
      }
      if (!serve_store.empty()) {
        store.emplace(serve_store);
        store_http = std::make_unique<services::StoreService>(*store, host, store_port);
        info["store"] = "http://" + host + ":" + std::to_string(store_http->port());
      }
      std::cout << info.dump() << std::endl;
      signal(SIGINT, on_signal);
      signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      if (issuer_http) issuer_http->stop();
      if (store_http) store_http->stop();
    } else if (*put) {
      auto sealed = services::SealedBundle::from_bytes(services::read_file(put_file));
      auto ref = is_url(store_loc) ? services::StoreClient(store_loc).put(sealed)
                                   : services::FsBundleStore(store_loc).put(sealed);
      emit(g, {{"id", ref.id}, {"location", ref.location}}, ref.id + "\n");
    } else if (*get) {
      auto sealed = is_url(store_loc) ? services::StoreClient(store_loc).get(get_id)
                                      : services::FsBundleStore(store_loc).get(get_id);
      write_public_file(get_out, sealed.bytes());
      emit(g, {{"id", get_id}, {"bundle", get_out}}, "wrote " + get_out + "\n");
    }
  } catch (const UsageError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const Error& e) {
    std::string message = e.what();
    if (e.kind() == ErrorKind::no_level_satisfied) message = "no level satisfied";
    std::cerr << json{{"error", error_kind_name(e.kind())}, {"message", message}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
