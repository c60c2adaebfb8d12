#include "pmod/common/crypto.hpp"

#include <memory>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod {

Digest sha256(ByteView data) {
  Digest out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest sha256(std::string_view data) { return sha256(as_bytes(data)); }

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error(ErrorKind::io, "EVP_CIPHER_CTX_new failed");
  return ctx;
}

}  // namespace

AeadSealed aead_seal(const AeadKey& key, const AeadNonce& nonce, ByteView plaintext,
                     ByteView associated_data) {
  auto ctx = new_ctx();
  AeadSealed out;
  out.nonce = nonce;
  out.ciphertext.resize(plaintext.size());
  int len = 0;
  bool ok = EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kAeadNonceSize, nullptr) == 1 &&
            EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) == 1;
  if (ok && !associated_data.empty())
    ok = EVP_EncryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                           static_cast<int>(associated_data.size())) == 1;
  if (ok && !plaintext.empty())
    ok = EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len, plaintext.data(),
                           static_cast<int>(plaintext.size())) == 1;
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), nullptr, &len) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize, out.tag.data()) == 1;
  if (!ok) throw Error(ErrorKind::io, "AES-256-GCM encryption failed");
  return out;
}

AeadSealed aead_seal(const AeadKey& key, RandomSource& rng, ByteView plaintext,
                     ByteView associated_data) {
  AeadNonce nonce{};
  rng.fill(nonce);
  return aead_seal(key, nonce, plaintext, associated_data);
}

Bytes aead_open(const AeadKey& key, const AeadSealed& sealed, ByteView associated_data) {
  auto ctx = new_ctx();
  Bytes out(sealed.ciphertext.size());
  AeadTag tag = sealed.tag;
  int len = 0;
  bool ok = EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kAeadNonceSize, nullptr) == 1 &&
            EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), sealed.nonce.data()) == 1;
  if (ok && !associated_data.empty())
    ok = EVP_DecryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                           static_cast<int>(associated_data.size())) == 1;
  if (ok && !sealed.ciphertext.empty())
    ok = EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.ciphertext.data(),
                           static_cast<int>(sealed.ciphertext.size())) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag.data()) == 1;
  if (!ok) throw Error(ErrorKind::io, "AES-256-GCM setup failed");
  if (EVP_DecryptFinal_ex(ctx.get(), nullptr, &len) != 1)
    throw AuthenticationFailure("AEAD authentication failed");
  return out;
}

AeadKey derive_passphrase_key(std::string_view passphrase, ByteView salt,
                              std::uint32_t iterations) {
  AeadKey key{};
  if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                        static_cast<int>(salt.size()), static_cast<int>(iterations), EVP_sha256(),
                        static_cast<int>(key.size()), key.data()) != 1)
    throw Error(ErrorKind::io, "PBKDF2 failed");
  return key;
}

bool constant_time_equal(ByteView a, ByteView b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace pmod
