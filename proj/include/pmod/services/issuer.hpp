#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "pmod/abe/abe.hpp"

namespace pmod::services {

struct IssuerOptions {
  std::string token;                      // static bearer credential
  std::uint32_t kdf_iterations = 200000;  // PBKDF2 rounds protecting issuer.key
  // Deterministic key issuance for tests; system randomness when absent.
  std::optional<std::uint64_t> seed;
};

// Key-issuer holding (PK, MK). On disk under state_dir:
//   issuer.pub   serialized public key
//   issuer.key   MK sealed with AES-256-GCM under PBKDF2(passphrase)
//   log.jsonl    one JSON record per issued key, append-only
class KeyIssuer {
 public:
  // Runs setup and writes a fresh state directory. Throws IoError if state
  // already exists there.
  static KeyIssuer initialize(const std::filesystem::path& state_dir, ContextPtr ctx,
                              std::string_view passphrase, RandomSource& rng,
                              IssuerOptions options);
  // Throws NotFound for a missing state directory and AuthenticationFailure
  // for a wrong passphrase.
  static KeyIssuer open(const std::filesystem::path& state_dir, std::string_view passphrase,
                        IssuerOptions options);

  KeyIssuer(KeyIssuer&& other) noexcept;
  ~KeyIssuer();

  Bytes public_params() const { return pk_bytes_; }
  const abe::PublicKey& public_key() const { return pk_; }

  // Throws Unauthorized for a bad token and InvalidArgument for an empty
  // attribute set. Safe to call concurrently.
  abe::PrivateKey issue_key(const std::string& requester, const policy::AttributeSet& attrs,
                            std::string_view token);

  const std::filesystem::path& state_dir() const { return dir_; }

 private:
  KeyIssuer(std::filesystem::path dir, abe::PublicKey pk, abe::MasterKey mk, IssuerOptions options);

  std::filesystem::path dir_;
  abe::PublicKey pk_;
  abe::MasterKey mk_;
  Bytes pk_bytes_;
  IssuerOptions options_;
  std::unique_ptr<RandomSource> rng_;
  std::mutex mutex_;  // serializes log appends and the shared rng
};

// Hex SHA-256 of the serialized key; what the log records.
std::string key_fingerprint(const abe::PrivateKey& sk);

// Writes bytes to path with mode 0600, replacing any existing file.
void write_secret_file(const std::filesystem::path& path, ByteView bytes);
Bytes read_file(const std::filesystem::path& path);

}  // namespace pmod::services
