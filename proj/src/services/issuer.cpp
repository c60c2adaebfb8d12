#include "pmod/services/issuer.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod::services {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kKeyAd = "pmod-issuer-key";

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::unique_ptr<RandomSource> make_rng(const IssuerOptions& o) {
  if (o.seed) return std::make_unique<SeededRandom>(*o.seed);
  return std::make_unique<SystemRandom>();
}

Bytes seal_master_key(const abe::MasterKey& mk, std::string_view passphrase, std::uint32_t iterations,
                      RandomSource& rng) {
  Bytes salt = rng.bytes(16);
  auto key = derive_passphrase_key(passphrase, salt, iterations);
  auto sealed = aead_seal(key, rng, abe::serialize(mk), as_bytes(kKeyAd));
  json j{{"format", "pmod-issuer-key"},
         {"kdf", "pbkdf2-hmac-sha256"},
         {"iterations", iterations},
         {"salt", base64_encode(salt)},
         {"nonce", base64_encode(sealed.nonce)},
         {"tag", base64_encode(sealed.tag)},
         {"ciphertext", base64_encode(sealed.ciphertext)}};
  auto text = j.dump(2) + "\n";
  return {text.begin(), text.end()};
}

abe::MasterKey open_master_key(ByteView file, std::string_view passphrase) {
  AeadSealed sealed;
  Bytes salt;
  std::uint32_t iterations = 0;
  try {
    auto j = json::parse(to_string(file));
    if (j.at("format").get<std::string>() != "pmod-issuer-key") throw FormatError("not an issuer key file");
    iterations = j.at("iterations").get<std::uint32_t>();
    salt = base64_decode(j.at("salt").get<std::string>());
    auto nonce = base64_decode(j.at("nonce").get<std::string>());
    auto tag = base64_decode(j.at("tag").get<std::string>());
    if (nonce.size() != sealed.nonce.size() || tag.size() != sealed.tag.size())
      throw FormatError("issuer key file has a bad nonce or tag");
    std::copy(nonce.begin(), nonce.end(), sealed.nonce.begin());
    std::copy(tag.begin(), tag.end(), sealed.tag.begin());
    sealed.ciphertext = base64_decode(j.at("ciphertext").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("issuer key file: ") + e.what());
  }
  auto key = derive_passphrase_key(passphrase, salt, iterations);
  Bytes plain;
  try {
    plain = aead_open(key, sealed, as_bytes(kKeyAd));
  } catch (const AuthenticationFailure&) {
    throw AuthenticationFailure("wrong passphrase for issuer.key (or the file was modified)");
  }
  return abe::deserialize_master_key(plain);
}

}  // namespace

std::string key_fingerprint(const abe::PrivateKey& sk) { return to_hex(sha256(abe::serialize(sk))); }

void write_secret_file(const fs::path& path, ByteView bytes) {
  const fs::path tmp = path.string() + ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
  if (fd < 0) throw IoError("cannot create " + tmp.string());
  ::fchmod(fd, 0600);
  std::size_t off = 0;
  while (off < bytes.size()) {
    auto n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n <= 0) {
      ::close(fd);
      throw IoError("cannot write " + tmp.string());
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw IoError("cannot write " + tmp.string());
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

KeyIssuer::KeyIssuer(fs::path dir, abe::PublicKey pk, abe::MasterKey mk, IssuerOptions options)
    : dir_(std::move(dir)),
      pk_(std::move(pk)),
      mk_(std::move(mk)),
      pk_bytes_(abe::serialize(pk_)),
      options_(std::move(options)),
      rng_(make_rng(options_)) {}

KeyIssuer::KeyIssuer(KeyIssuer&& o) noexcept
    : dir_(std::move(o.dir_)),
      pk_(std::move(o.pk_)),
      mk_(std::move(o.mk_)),
      pk_bytes_(std::move(o.pk_bytes_)),
      options_(std::move(o.options_)),
      rng_(std::move(o.rng_)) {}

KeyIssuer::~KeyIssuer() = default;

KeyIssuer KeyIssuer::initialize(const fs::path& state_dir, ContextPtr ctx, std::string_view passphrase,
                                RandomSource& rng, IssuerOptions options) {
  if (passphrase.empty()) throw InvalidArgument("an issuer passphrase is required");
  if (fs::exists(state_dir / "issuer.key") || fs::exists(state_dir / "issuer.pub"))
    throw IoError("issuer state already exists in " + state_dir.string());
  fs::create_directories(state_dir);
  auto [pk, mk] = abe::setup(std::move(ctx), rng);
  write_secret_file(state_dir / "issuer.key", seal_master_key(mk, passphrase, options.kdf_iterations, rng));
  auto pub = abe::serialize(pk);
  {
    std::ofstream out(state_dir / "issuer.pub", std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(pub.data()), static_cast<std::streamsize>(pub.size()));
    if (!out) throw IoError("cannot write issuer.pub");
  }
  std::ofstream(state_dir / "log.jsonl", std::ios::app);
  return KeyIssuer(state_dir, std::move(pk), std::move(mk), std::move(options));
}

KeyIssuer KeyIssuer::open(const fs::path& state_dir, std::string_view passphrase, IssuerOptions options) {
  if (!fs::exists(state_dir / "issuer.pub") || !fs::exists(state_dir / "issuer.key"))
    throw NotFound("no issuer state in " + state_dir.string());
  auto pk = abe::deserialize_public_key(read_file(state_dir / "issuer.pub"));
  auto mk = open_master_key(read_file(state_dir / "issuer.key"), passphrase);
  const auto& ctx = *pk.ctx;
  if (mk.ctx != pk.ctx || !(ctx.exp(pk.g, mk.beta) == pk.B) ||
      !(ctx.pair(pk.g, mk.g_alpha) == pk.egg_alpha))
    throw IntegrityError("issuer.key does not belong to issuer.pub");
  return KeyIssuer(state_dir, std::move(pk), std::move(mk), std::move(options));
}

abe::PrivateKey KeyIssuer::issue_key(const std::string& requester, const policy::AttributeSet& attrs,
                                     std::string_view token) {
  // Comparing digests keeps the check independent of the token length.
  if (options_.token.empty() || !constant_time_equal(sha256(token), sha256(options_.token)))
    throw Unauthorized("bad bearer token");
  if (attrs.empty()) throw InvalidArgument("cannot issue a key for an empty attribute set");
  std::lock_guard lock(mutex_);
  auto sk = abe::keygen(mk_, attrs, *rng_);
  json record{{"timestamp", utc_now()},
              {"requester", requester},
              {"attributes", std::vector<std::string>(attrs.begin(), attrs.end())},
              {"fingerprint", key_fingerprint(sk)}};
  std::ofstream log(dir_ / "log.jsonl", std::ios::app);
  log << record.dump() << '\n';
  log.flush();
  if (!log) throw IoError("cannot append to the issuance log");
  return sk;
}

}  // namespace pmod::services
