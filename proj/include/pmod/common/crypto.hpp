#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "pmod/common/bytes.hpp"

namespace pmod {

class RandomSource;

Digest sha256(ByteView data);
Digest sha256(std::string_view data);

constexpr std::size_t kAeadKeySize = 32;
constexpr std::size_t kAeadNonceSize = 12;
constexpr std::size_t kAeadTagSize = 16;

using AeadKey = std::array<std::uint8_t, kAeadKeySize>;
using AeadNonce = std::array<std::uint8_t, kAeadNonceSize>;
using AeadTag = std::array<std::uint8_t, kAeadTagSize>;

struct AeadSealed {
  AeadNonce nonce{};
  AeadTag tag{};
  Bytes ciphertext;
};

// AES-256-GCM.
AeadSealed aead_seal(const AeadKey& key, const AeadNonce& nonce, ByteView plaintext,
                     ByteView associated_data);
AeadSealed aead_seal(const AeadKey& key, RandomSource& rng, ByteView plaintext,
                     ByteView associated_data);
// Throws AuthenticationFailure if the tag does not verify.
Bytes aead_open(const AeadKey& key, const AeadSealed& sealed, ByteView associated_data);

// PBKDF2-HMAC-SHA256.
AeadKey derive_passphrase_key(std::string_view passphrase, ByteView salt,
                              std::uint32_t iterations);

bool constant_time_equal(ByteView a, ByteView b);

}  // namespace pmod
