#include <doctest.h>
#include <sys/stat.h>

#include <fstream>
#include <mutex>
#include <thread>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"
#include "pmod/hierarchy/hierarchy.hpp"
#include "pmod/policy/policy_text.hpp"
#include "pmod/services/http.hpp"
#include "support/temp_dir.hpp"

using namespace pmod;
using namespace pmod::services;
using policy::AttributeSet;

namespace {

const mpz_class kBigPrime("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);

IssuerOptions options() { return IssuerOptions{"s3cret-token", 1000, std::nullopt}; }

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

bool contains(const Bytes& hay, const Bytes& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

TEST_CASE("issuer state persists across restarts") {
  testing::TempDir dir;
  SeededRandom rng(1);
  CHECK_THROWS_AS(KeyIssuer::open(dir.path(), "pw", options()), NotFound);
  Bytes pk_bytes;
  {
    auto issuer = KeyIssuer::initialize(dir.path(), PairingContext::bls12_381(), "pw", rng, options());
    pk_bytes = issuer.public_params();
    CHECK(issuer.public_params() == pk_bytes);
    CHECK(abe::serialize(abe::deserialize_public_key(pk_bytes)) == pk_bytes);
  }
  CHECK_THROWS_AS(KeyIssuer::initialize(dir.path(), PairingContext::bls12_381(), "pw", rng, options()),
                  IoError);
  auto reopened = KeyIssuer::open(dir.path(), "pw", options());
  CHECK(reopened.public_params() == pk_bytes);
  CHECK(read_file(dir / "issuer.pub") == pk_bytes);
  CHECK_THROWS_AS(KeyIssuer::open(dir.path(), "wrong", options()), AuthenticationFailure);

  struct stat st{};
  REQUIRE(::stat((dir / "issuer.key").c_str(), &st) == 0);
  CHECK((st.st_mode & 0777) == 0600);
}

TEST_CASE("issuing keys") {
  testing::TempDir dir;
  SeededRandom rng(2);
  auto issuer = KeyIssuer::initialize(dir.path(), PairingContext::transparent(kBigPrime), "pw", rng, options());
  const auto& pk = issuer.public_key();

  auto ct = abe::encrypt(pk, pk.ctx->random_g1(rng), policy::parse_policy("A AND B"), rng);
  auto k1 = issuer.issue_key("alice", AttributeSet{"A", "B"}, "s3cret-token");
  auto k2 = issuer.issue_key("alice", AttributeSet{"A", "B"}, "s3cret-token");
  CHECK(abe::decrypt(ct, k1) == abe::decrypt(ct, k2));
  CHECK(key_fingerprint(k1) != key_fingerprint(k2));

  CHECK_THROWS_AS(issuer.issue_key("mallory", AttributeSet{"A"}, "guess"), Unauthorized);
  CHECK_THROWS_AS(issuer.issue_key("mallory", AttributeSet{"A"}, ""), Unauthorized);
  CHECK_THROWS_AS(issuer.issue_key("bob", AttributeSet{}, "s3cret-token"), InvalidArgument);
  CHECK(line_count(dir / "log.jsonl") == 2);

  // No plaintext master key encoding on disk, only the sealed form.
  auto mk_file = read_file(dir / "issuer.key");
  CHECK_FALSE(contains(mk_file, Bytes{'P', 'M', 'O', 'D', 1, 2}));
  CHECK(to_string(mk_file).find("\"ciphertext\"") != std::string::npos);
}

TEST_CASE("concurrent issuance keeps the log consistent") {
  testing::TempDir dir;
  SeededRandom rng(3);
  auto issuer = KeyIssuer::initialize(dir.path(), PairingContext::transparent(kBigPrime), "pw", rng, options());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&issuer, t] {
      for (int i = 0; i < 10; ++i) issuer.issue_key("user" + std::to_string(t), AttributeSet{"A"}, "s3cret-token");
    });
  for (auto& th : threads) th.join();
  CHECK(line_count(dir / "log.jsonl") == 40);
}

TEST_CASE("content-addressed store") {
  testing::TempDir dir;
  FsBundleStore store(dir.path());
  const std::string text = "PMODBNDL and some payload";
  auto bundle = SealedBundle::from_bytes(Bytes(text.begin(), text.end()));
  auto ref = store.put(bundle);
  CHECK(ref.id == to_hex(sha256(bundle.bytes())));
  CHECK(store.put(bundle).id == ref.id);
  CHECK(store.get(ref.id).bytes() == bundle.bytes());

  CHECK_THROWS_AS(store.get(std::string(64, 'a')), NotFound);
  CHECK_THROWS_AS(store.get("../../etc/passwd"), InvalidArgument);
  CHECK_THROWS_AS(SealedBundle::from_bytes(Bytes{'P', 'M', 'O', 'D'}), FormatError);

  {
    std::ofstream out(ref.location, std::ios::binary | std::ios::app);
    out << "x";
  }
  CHECK_THROWS_AS(store.get(ref.id), IntegrityError);
}

TEST_CASE("http services: issuer and store round trip") {
  testing::TempDir state, objects;
  SeededRandom rng(4);
  auto issuer = KeyIssuer::initialize(state.path(), PairingContext::bls12_381(), "pw", rng, options());
  FsBundleStore store(objects.path());

  std::mutex m;
  std::vector<std::string> store_traffic;
  IssuerService issuer_http(issuer);
  StoreService store_http(store, "127.0.0.1", 0,
                          [&](const std::string&, const std::string& path, const std::string& req,
                              const std::string& res) {
                            std::lock_guard lock(m);
                            store_traffic.push_back(path + "\n" + req + "\n" + res);
                          });

  IssuerClient ic(issuer_http.url());
  StoreClient sc(store_http.url());
  auto pk = ic.params();
  CHECK(abe::serialize(pk) == issuer.public_params());
  auto sk = ic.issue("carol", AttributeSet{"L1"}, "s3cret-token");
  CHECK_THROWS_AS(ic.issue("carol", AttributeSet{"L1"}, "nope"), Unauthorized);
  CHECK_THROWS_AS(ic.issue("carol", AttributeSet{}, "s3cret-token"), InvalidArgument);

  partition::PartitionPlan plan{partition::Mode::column_groups, {partition::Group{{"a"}, {}}, partition::Group{{"b"}, {}}}};
  auto spec = hierarchy::make_spec({"L1", "L2"}, plan);
  auto bundle = hierarchy::pmod_encrypt(pk, "a,b\n1,2\n", spec, rng);
  auto sealed = SealedBundle::from_bytes(hierarchy::serialize(bundle));
  auto ref = sc.put(sealed);
  auto fetched = sc.get(ref.id);
  CHECK(fetched.bytes() == sealed.bytes());
  auto got = hierarchy::pmod_decrypt(hierarchy::deserialize_bundle(fetched.bytes()), sk);
  CHECK(to_string(got.view) == "a,b\n1,2\n");

  CHECK_THROWS_AS(sc.get(std::string(64, '0')), NotFound);

  // The store saw bundles only.
  std::lock_guard lock(m);
  CHECK(store_traffic.size() == 3);
  const auto sk_b64 = base64_encode(abe::serialize(sk));
  const auto pk_b64 = base64_encode(abe::serialize(pk));
  for (const auto& t : store_traffic) {
    CHECK(t.find(sk_b64) == std::string::npos);
    CHECK(t.find(pk_b64) == std::string::npos);
  }
}
