#include "backend.hpp"

#include <openssl/sha.h>

#include "pmod/common/error.hpp"

namespace pmod::detail {
namespace {

// Z_p under addition standing in for both G0 and G1: g^x is stored as x, the
// group law adds exponents and the pairing multiplies them.
class TransparentBackend final : public GroupBackend {
 public:
  explicit TransparentBackend(mpz_class p) : p_(std::move(p)) {}

  const mpz_class& order() const override { return p_; }

  G0Element::Rep g0_generator() const override { return TransparentRep{1}; }
  G0Element::Rep g0_identity() const override { return TransparentRep{0}; }
  G0Element::Rep g0_exp(const G0Element::Rep& x, const mpz_class& a) const override {
    return TransparentRep{reduce(log0(x) * a)};
  }
  G0Element::Rep g0_mul(const G0Element::Rep& x, const G0Element::Rep& y) const override {
    return TransparentRep{reduce(log0(x) + log0(y))};
  }
  bool g0_is_identity(const G0Element::Rep& x) const override { return log0(x) == 0; }
  G0Element::Rep hash_to_g0(ByteView label) const override {
    std::uint8_t digest[SHA256_DIGEST_LENGTH];
    SHA256(label.data(), label.size(), digest);
    mpz_class z;
    mpz_import(z.get_mpz_t(), sizeof(digest), 1, 1, 1, 0, digest);
    return TransparentRep{reduce(z)};
  }
  Bytes g0_encode(const G0Element::Rep& x) const override { return encode(log0(x)); }
  G0Element::Rep g0_decode(ByteView payload) const override {
    return TransparentRep{decode(payload)};
  }
  std::optional<mpz_class> g0_log(const G0Element::Rep& x) const override { return log0(x); }

  G1Element::Rep g1_identity() const override { return TransparentRep{0}; }
  G1Element::Rep g1_exp(const G1Element::Rep& x, const mpz_class& a) const override {
    return TransparentRep{reduce(log1(x) * a)};
  }
  G1Element::Rep g1_mul(const G1Element::Rep& x, const G1Element::Rep& y) const override {
    return TransparentRep{reduce(log1(x) + log1(y))};
  }
  G1Element::Rep g1_inverse(const G1Element::Rep& x) const override {
    return TransparentRep{reduce(-log1(x))};
  }
  bool g1_is_identity(const G1Element::Rep& x) const override { return log1(x) == 0; }
  Bytes g1_encode(const G1Element::Rep& x) const override { return encode(log1(x)); }
  G1Element::Rep g1_decode(ByteView payload) const override {
    return TransparentRep{decode(payload)};
  }
  std::optional<mpz_class> g1_log(const G1Element::Rep& x) const override { return log1(x); }

  G1Element::Rep pair(const G0Element::Rep& a, const G0Element::Rep& b) const override {
    return TransparentRep{reduce(log0(a) * log0(b))};
  }

 private:
  static const mpz_class& log0(const G0Element::Rep& x) {
    return std::get<TransparentRep>(x).exponent;
  }
  static const mpz_class& log1(const G1Element::Rep& x) {
    return std::get<TransparentRep>(x).exponent;
  }
  mpz_class reduce(const mpz_class& v) const {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t());
    return r;
  }
  static Bytes encode(const mpz_class& v) {
    Bytes out(32, 0);
    std::size_t count = 0;
    Bytes tmp(33);
    mpz_export(tmp.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(count),
              out.end() - static_cast<std::ptrdiff_t>(count));
    return out;
  }
  mpz_class decode(ByteView payload) const {
    if (payload.size() != 32) throw FormatError("transparent element must be 32 bytes");
    mpz_class z;
    mpz_import(z.get_mpz_t(), payload.size(), 1, 1, 1, 0, payload.data());
    if (z >= p_) throw FormatError("transparent element is not reduced");
    return z;
  }

  mpz_class p_;
};

}  // namespace

std::unique_ptr<GroupBackend> make_transparent_backend(const mpz_class& prime) {
  return std::make_unique<TransparentBackend>(prime);
}

}  // namespace pmod::detail
