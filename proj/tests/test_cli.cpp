#include <doctest.h>
#include <sys/stat.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pmod/common/bytes.hpp"
#include "pmod/common/crypto.hpp"
#include "support/run.hpp"
#include "support/temp_dir.hpp"

using nlohmann::json;
using pmod::testing::RunResult;
using pmod::testing::TempDir;

namespace {

const char* const kCli = PMOD_CLI_PATH;

const char* const kSpec = R"({"levels":[
 {"index":1,"policy":"doctor and cardiology","label":"full"},
 {"index":2,"policy":"doctor or nurse","label":"clinical"},
 {"index":3,"policy":"staff","label":"public"}],
 "partition":{"mode":"column_groups","groups":[["ssn"],["name","diagnosis"],["ward"]]}})";

const char* const kData = "ssn,name,diagnosis,ward\n111,Ann,flu,3\n222,\"Bo, Jr\",cold,4\n";

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::string file_sha256(const std::filesystem::path& p) {
  return pmod::to_hex(pmod::sha256(pmod::as_bytes(pmod::testing::slurp(p))));
}

// State, three keys and one bundle, all deterministic.
struct Fixture {
  TempDir dir;
  RunResult cli(std::vector<std::string> args) { return pmod::testing::run(kCli, args, dir.path()); }
  std::string p(const std::string& n) const { return (dir / n).string(); }

  Fixture() {
    setenv("PMOD_PASSPHRASE", "correct horse", 1);
    write(dir / "spec.json", kSpec);
    write(dir / "data.csv", kData);
    REQUIRE(cli({"--backend", "transparent", "--seed", "1", "setup", "--out", p("st"), "--kdf-iterations", "1000"})
                .exit_code == 0);
    REQUIRE(cli({"--backend", "transparent", "--seed", "1", "keygen", "--state", p("st"), "--attr", "nurse",
                 "--attr", "staff", "--out", p("nurse.key")})
                .exit_code == 0);
    REQUIRE(cli({"--backend", "transparent", "--seed", "1", "keygen", "--state", p("st"), "--attr", "doctor",
                 "--attr", "cardiology", "--attr", "staff", "--out", p("doc.key")})
                .exit_code == 0);
    REQUIRE(cli({"--backend", "transparent", "--seed", "2", "keygen", "--state", p("st"), "--attr", "visitor",
                 "--out", p("visitor.key")})
                .exit_code == 0);
    REQUIRE(cli({"--seed", "3", "encrypt", "--state", p("st"), "--spec", p("spec.json"), "--in", p("data.csv"),
                 "--out", p("b.pmod"), "--created-at", "2024-01-01T00:00:00Z"})
                .exit_code == 0);
  }
};

}  // namespace

TEST_CASE("seeded transparent bundle matches the frozen digest") {
  Fixture f;
  CHECK(file_sha256(f.dir / "b.pmod") == "e74bbc0324e6933e8e904b88b69d136a395a3400e32acbf4d70f365cd0511146");
  auto again = f.cli({"--seed", "3", "encrypt", "--state", f.p("st"), "--spec", f.p("spec.json"), "--in",
                      f.p("data.csv"), "--out", f.p("b2.pmod"), "--created-at", "2024-01-01T00:00:00Z"});
  REQUIRE(again.exit_code == 0);
  CHECK(file_sha256(f.dir / "b2.pmod") == file_sha256(f.dir / "b.pmod"));
}

TEST_CASE("decrypt returns the view of the highest satisfied level") {
  Fixture f;
  auto nurse = f.cli({"decrypt", "--key", f.p("nurse.key"), "--bundle", f.p("b.pmod")});
  CHECK(nurse.exit_code == 0);
  CHECK(nurse.out == "name,diagnosis,ward\nAnn,flu,3\n\"Bo, Jr\",cold,4\n");

  auto doc = f.cli({"--json", "decrypt", "--key", f.p("doc.key"), "--bundle", f.p("b.pmod"), "--out", f.p("full.csv")});
  CHECK(doc.exit_code == 0);
  CHECK(json::parse(doc.out).at("achieved_level") == 1);
  CHECK(pmod::testing::slurp(f.dir / "full.csv") == kData);

  auto parts = f.cli({"decrypt", "--key", f.p("nurse.key"), "--bundle", f.p("b.pmod"), "--out", f.p("v.csv"),
                      "--parts-dir", f.p("parts")});
  CHECK(parts.exit_code == 0);
  CHECK(pmod::testing::slurp(f.dir / "parts/part-2.csv") == "name,diagnosis\nAnn,flu\n\"Bo, Jr\",cold\n");
  CHECK(pmod::testing::slurp(f.dir / "parts/part-3.csv") == "ward\n3\n4\n");
  CHECK_FALSE(std::filesystem::exists(f.dir / "parts/part-1.csv"));
}

TEST_CASE("a key satisfying no level exits 1 with a JSON error") {
  Fixture f;
  auto r = f.cli({"decrypt", "--key", f.p("visitor.key"), "--bundle", f.p("b.pmod")});
  CHECK(r.exit_code == 1);
  CHECK(r.out.empty());
  auto err = json::parse(r.err);
  CHECK(err.at("error") == "no_level_satisfied");
  CHECK(err.at("message").get<std::string>().find("no level satisfied") != std::string::npos);
}

TEST_CASE("inspect reports policies and element counts") {
  Fixture f;
  auto r = f.cli({"--json", "inspect", f.p("b.pmod")});
  REQUIRE(r.exit_code == 0);
  auto j = json::parse(r.out);
  CHECK(j.at("k") == 3);
  CHECK(j.at("created_at") == "2024-01-01T00:00:00Z");
  const auto& levels = j.at("levels");
  REQUIRE(levels.size() == 3);
  CHECK(levels[0].at("policy") == "doctor AND cardiology");
  CHECK(levels[1].at("policy") == "doctor OR nurse");
  CHECK(levels[2].at("label") == "public");
  CHECK(levels[0].at("leaves") == 2);
  CHECK(levels[2].at("leaves") == 1);
  // one C~ and one C per level, plus (C_y, C'_y) per leaf
  CHECK(j.at("elements").at("g0") == 3 + 2 * 5);
  CHECK(j.at("elements").at("g1") == 3);

  auto human = f.cli({"inspect", f.p("b.pmod")});
  CHECK(human.exit_code == 0);
  CHECK(human.out.find("clinical: doctor OR nurse") != std::string::npos);
}

TEST_CASE("secrets go to 0600 files and never to stdout") {
  Fixture f;
  for (const char* name : {"nurse.key", "doc.key", "st/issuer.key"}) {
    struct stat st{};
    REQUIRE(stat(f.p(name).c_str(), &st) == 0);
    CHECK((st.st_mode & 0777) == 0600);
  }
  auto r = f.cli({"--json", "--backend", "transparent", "keygen", "--state", f.p("st"), "--attr", "nurse", "--out",
                  f.p("k2.key")});
  REQUIRE(r.exit_code == 0);
  const auto key = pmod::as_bytes(pmod::testing::slurp(f.dir / "k2.key"));
  CHECK(r.out.find(pmod::to_hex(key).substr(0, 64)) == std::string::npos);
  CHECK(r.out.find(pmod::base64_encode(key).substr(0, 40)) == std::string::npos);
  CHECK(json::parse(r.out).contains("fingerprint"));
}

TEST_CASE("usage errors exit 2") {
  Fixture f;
  CHECK(f.cli({"decrypt", "--bundle", f.p("b.pmod")}).exit_code == 2);
  CHECK(f.cli({"--frobnicate", "inspect", f.p("b.pmod")}).exit_code == 2);
  CHECK(f.cli({"inspect", f.p("missing.pmod")}).exit_code == 2);
  CHECK(f.cli({"--seed", "5", "setup", "--out", f.p("st2")}).exit_code == 2);
  CHECK(f.cli({"--backend", "nope", "setup", "--out", f.p("st3")}).exit_code == 2);
  CHECK(f.cli({"--help"}).exit_code == 0);
  unsetenv("PMOD_PASSPHRASE");
  CHECK(f.cli({"--backend", "transparent", "setup", "--out", f.p("st4")}).exit_code == 2);
  setenv("PMOD_PASSPHRASE", "wrong", 1);
  auto bad = f.cli({"keygen", "--state", f.p("st"), "--attr", "a", "--out", f.p("x.key")});
  CHECK(bad.exit_code == 1);
  CHECK(json::parse(bad.err).at("error") == "authentication");
}

TEST_CASE("directory store round trip and tampered bundles") {
  Fixture f;
  auto put = f.cli({"put", "--store", f.p("store"), f.p("b.pmod")});
  REQUIRE(put.exit_code == 0);
  const auto id = put.out.substr(0, put.out.find('\n'));
  CHECK(id == file_sha256(f.dir / "b.pmod"));
  REQUIRE(f.cli({"get", "--store", f.p("store"), id, "--out", f.p("g.pmod")}).exit_code == 0);
  CHECK(pmod::testing::slurp(f.dir / "g.pmod") == pmod::testing::slurp(f.dir / "b.pmod"));
  auto missing = f.cli({"get", "--store", f.p("store"), std::string(64, 'a'), "--out", f.p("m.pmod")});
  CHECK(missing.exit_code == 1);
  CHECK(json::parse(missing.err).at("error") == "not_found");

  auto bytes = pmod::testing::slurp(f.dir / "b.pmod");
  bytes[bytes.size() - 5] ^= 0x40;
  write(f.dir / "t.pmod", bytes);
  auto r = f.cli({"decrypt", "--key", f.p("doc.key"), "--bundle", f.p("t.pmod")});
  CHECK(r.exit_code == 1);
  CHECK(r.out.empty());
}

TEST_CASE("CRLF input decrypts to the canonical form") {
  Fixture f;
  write(f.dir / "crlf.csv", "ssn,name,diagnosis,ward\r\n111,Ann,flu,3\r\n222,\"Bo, Jr\",cold,4\r\n");
  REQUIRE(f.cli({"--backend", "transparent", "encrypt", "--state", f.p("st"), "--spec", f.p("spec.json"), "--in",
                 f.p("crlf.csv"), "--out", f.p("c.pmod")})
              .exit_code == 0);
  auto r = f.cli({"decrypt", "--key", f.p("doc.key"), "--bundle", f.p("c.pmod")});
  CHECK(r.exit_code == 0);
  CHECK(r.out == kData);
}

TEST_CASE("bench emits the report schema") {
  Fixture f;
  auto r = f.cli({"--backend", "transparent", "bench", "--k", "3", "--n", "9", "--counts-only", "--rows", "10",
                  "--out", f.p("r.csv")});
  REQUIRE(r.exit_code == 0);
  const auto csv = pmod::testing::slurp(f.dir / "r.csv");
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(header.find("scheme") != std::string::npos);
  CHECK(header.find("decrypt_tree_pairings") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
