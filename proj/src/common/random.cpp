#include "pmod/common/random.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"

namespace pmod {

Bytes RandomSource::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto c : b) v = (v << 8) | c;
  return v;
}

std::uint64_t RandomSource::uniform(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform bound must be positive");
  // Largest multiple of bound that fits, to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

mpz_class RandomSource::uniform(const mpz_class& bound) {
  if (bound <= 0) throw InvalidArgument("uniform bound must be positive");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t nbytes = (bits + 7) / 8;
  const unsigned top_mask = bits % 8 == 0 ? 0xffu : (1u << (bits % 8)) - 1;
  Bytes buf(nbytes);
  mpz_class v;
  for (;;) {
    fill(buf);
    buf[0] &= static_cast<std::uint8_t>(top_mask);
    mpz_import(v.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
    if (v < bound) return v;
  }
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    throw Error(ErrorKind::io, "RAND_bytes failed");
}

struct SeededRandom::State {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~State() { EVP_CIPHER_CTX_free(ctx); }
};

SeededRandom::SeededRandom(std::uint64_t seed) : state_(std::make_unique<State>()) {
  ByteWriter w;
  w.str("pmod-seeded-random");
  w.u64(seed);
  const Digest key = sha256(w.bytes());
  const std::array<std::uint8_t, 16> iv{};
  state_->ctx = EVP_CIPHER_CTX_new();
  if (state_->ctx == nullptr ||
      EVP_EncryptInit_ex(state_->ctx, EVP_chacha20(), nullptr, key.data(), iv.data()) != 1)
    throw Error(ErrorKind::io, "chacha20 init failed");
}

SeededRandom::~SeededRandom() = default;

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::fill(out.begin(), out.end(), std::uint8_t{0});
  int len = 0;
  if (EVP_EncryptUpdate(state_->ctx, out.data(), &len, out.data(),
                        static_cast<int>(out.size())) != 1)
    throw Error(ErrorKind::io, "chacha20 keystream failed");
}

}  // namespace pmod
