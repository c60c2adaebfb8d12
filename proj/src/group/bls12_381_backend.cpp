#include "backend.hpp"

#include <array>
#include <cstring>

#include "pmod/common/error.hpp"

namespace pmod::detail {
namespace {

constexpr char kHashDst[] = "PMOD-V01-CS01-with-BLS12381G2_XMD:SHA-256_SSWU_RO_";
constexpr std::size_t kScalarBits = 255;
constexpr std::size_t kFp12Bytes = 48 * 12;

// Group order r of BLS12-381.
const char* const kOrderHex = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

std::array<std::uint8_t, 32> little_endian(const mpz_class& a) {
  std::array<std::uint8_t, 32> out{};
  std::size_t count = 0;
  mpz_export(out.data(), &count, -1, 1, -1, 0, a.get_mpz_t());
  return out;
}

bool fp12_equal(const blst_fp12& a, const blst_fp12& b) { return blst_fp12_is_equal(&a, &b); }

// Type-3 curve presented as a symmetric group (see CurveG0Rep).
class Bls12Backend final : public GroupBackend {
 public:
  Bls12Backend() { order_.set_str(kOrderHex, 16); }

  const mpz_class& order() const override { return order_; }

  G0Element::Rep g0_generator() const override {
    CurveG0Rep r;
    r.has_g1 = true;
    r.g1 = *blst_p1_generator();
    r.g2 = *blst_p2_generator();
    return r;
  }
  G0Element::Rep g0_identity() const override {
    CurveG0Rep r;
    r.has_g1 = true;  // all-zero projective coordinates encode infinity in blst
    return r;
  }
  G0Element::Rep g0_exp(const G0Element::Rep& x, const mpz_class& a) const override {
    const auto& in = std::get<CurveG0Rep>(x);
    const auto scalar = little_endian(a);
    CurveG0Rep out;
    out.has_g1 = in.has_g1;
    if (in.has_g1) blst_p1_mult(&out.g1, &in.g1, scalar.data(), kScalarBits);
    blst_p2_mult(&out.g2, &in.g2, scalar.data(), kScalarBits);
    return out;
  }
  G0Element::Rep g0_mul(const G0Element::Rep& x, const G0Element::Rep& y) const override {
    const auto& a = std::get<CurveG0Rep>(x);
    const auto& b = std::get<CurveG0Rep>(y);
    CurveG0Rep out;
    out.has_g1 = a.has_g1 && b.has_g1;
    if (out.has_g1) blst_p1_add_or_double(&out.g1, &a.g1, &b.g1);
    blst_p2_add_or_double(&out.g2, &a.g2, &b.g2);
    return out;
  }
  bool g0_is_identity(const G0Element::Rep& x) const override {
    return blst_p2_is_inf(&std::get<CurveG0Rep>(x).g2);
  }
  G0Element::Rep hash_to_g0(ByteView label) const override {
    CurveG0Rep out;
    blst_hash_to_g2(&out.g2, label.data(), label.size(),
                    reinterpret_cast<const byte*>(kHashDst), sizeof(kHashDst) - 1, nullptr, 0);
    return out;
  }
  Bytes g0_encode(const G0Element::Rep& x) const override {
    const auto& in = std::get<CurveG0Rep>(x);
    Bytes out(1 + (in.has_g1 ? 48 : 0) + 96);
    out[0] = in.has_g1 ? 1 : 0;
    std::size_t off = 1;
    if (in.has_g1) {
      blst_p1_compress(out.data() + off, &in.g1);
      off += 48;
    }
    blst_p2_compress(out.data() + off, &in.g2);
    return out;
  }
  G0Element::Rep g0_decode(ByteView payload) const override {
    if (payload.empty() || payload[0] > 1) throw FormatError("bad G0 representation flags");
    CurveG0Rep out;
    out.has_g1 = payload[0] == 1;
    if (payload.size() != 1 + (out.has_g1 ? 48u : 0u) + 96u)
      throw FormatError("bad G0 encoding length");
    std::size_t off = 1;
    if (out.has_g1) {
      blst_p1_affine aff;
      if (blst_p1_uncompress(&aff, payload.data() + off) != BLST_SUCCESS ||
          !blst_p1_affine_in_g1(&aff))
        throw FormatError("invalid G1 point");
      blst_p1_from_affine(&out.g1, &aff);
      off += 48;
    }
    blst_p2_affine aff2;
    if (blst_p2_uncompress(&aff2, payload.data() + off) != BLST_SUCCESS ||
        !blst_p2_affine_in_g2(&aff2))
      throw FormatError("invalid G2 point");
    blst_p2_from_affine(&out.g2, &aff2);
    return out;
  }

  G1Element::Rep g1_identity() const override { return CurveG1Rep{*blst_fp12_one()}; }
  G1Element::Rep g1_exp(const G1Element::Rep& x, const mpz_class& a) const override {
    return CurveG1Rep{fp12_pow(std::get<CurveG1Rep>(x).value, a)};
  }
  G1Element::Rep g1_mul(const G1Element::Rep& x, const G1Element::Rep& y) const override {
    CurveG1Rep out;
    blst_fp12_mul(&out.value, &std::get<CurveG1Rep>(x).value, &std::get<CurveG1Rep>(y).value);
    return out;
  }
  G1Element::Rep g1_inverse(const G1Element::Rep& x) const override {
    // Pairing outputs lie in the cyclotomic subgroup, where inversion is conjugation.
    CurveG1Rep out = std::get<CurveG1Rep>(x);
    blst_fp12_conjugate(&out.value);
    return out;
  }
  bool g1_is_identity(const G1Element::Rep& x) const override {
    return blst_fp12_is_one(&std::get<CurveG1Rep>(x).value);
  }
  Bytes g1_encode(const G1Element::Rep& x) const override {
    Bytes out(kFp12Bytes);
    blst_bendian_from_fp12(out.data(), &std::get<CurveG1Rep>(x).value);
    return out;
  }
  G1Element::Rep g1_decode(ByteView payload) const override {
    if (payload.size() != kFp12Bytes) throw FormatError("bad G1 encoding length");
    // Inverse of blst_bendian_from_fp12's coefficient order.
    CurveG1Rep out;
    const std::uint8_t* p = payload.data();
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        blst_fp_from_bendian(&out.value.fp6[j].fp2[i].fp[0], p);
        p += 48;
        blst_fp_from_bendian(&out.value.fp6[j].fp2[i].fp[1], p);
        p += 48;
      }
    }
    if (Bytes check = g1_encode(out); std::memcmp(check.data(), payload.data(), kFp12Bytes) != 0)
      throw FormatError("non-canonical G1 encoding");
    if (!blst_fp12_in_group(&out.value)) throw FormatError("G1 element not in the target group");
    return out;
  }

  G1Element::Rep pair(const G0Element::Rep& x, const G0Element::Rep& y) const override {
    const auto& a = std::get<CurveG0Rep>(x);
    const auto& b = std::get<CurveG0Rep>(y);
    const blst_p1* p;
    const blst_p2* q;
    if (a.has_g1) {
      p = &a.g1;
      q = &b.g2;
    } else if (b.has_g1) {
      p = &b.g1;
      q = &a.g2;
    } else {
      throw InvalidArgument("cannot pair two hashed G0 elements");
    }
    if (blst_p1_is_inf(p) || blst_p2_is_inf(q)) return g1_identity();
    blst_p1_affine pa;
    blst_p2_affine qa;
    blst_p1_to_affine(&pa, p);
    blst_p2_to_affine(&qa, q);
    blst_fp12 ml;
    blst_miller_loop(&ml, &qa, &pa);
    CurveG1Rep out;
    blst_final_exp(&out.value, &ml);
    return out;
  }

 private:
  // Fixed 4-bit window exponentiation in the cyclotomic subgroup.
  static blst_fp12 fp12_pow(const blst_fp12& base, const mpz_class& e) {
    std::array<blst_fp12, 16> table;
    table[0] = *blst_fp12_one();
    table[1] = base;
    for (std::size_t i = 2; i < table.size(); ++i) blst_fp12_mul(&table[i], &table[i - 1], &base);
    blst_fp12 acc = *blst_fp12_one();
    const auto bytes = little_endian(e);
    bool started = false;
    for (std::size_t i = bytes.size(); i-- > 0;) {
      for (int half = 1; half >= 0; --half) {
        const unsigned nibble = (bytes[i] >> (4 * half)) & 0xf;
        if (started)
          for (int s = 0; s < 4; ++s) blst_fp12_cyclotomic_sqr(&acc, &acc);
        if (nibble != 0) {
          blst_fp12_mul(&acc, &acc, &table[nibble]);
          started = true;
        }
      }
    }
    return acc;
  }

  mpz_class order_;
};

}  // namespace

std::unique_ptr<GroupBackend> make_bls12_381_backend() { return std::make_unique<Bls12Backend>(); }

bool curve_g0_equal(const CurveG0Rep& a, const CurveG0Rep& b) {
  return blst_p2_is_equal(&a.g2, &b.g2);
}

bool curve_g1_equal(const CurveG1Rep& a, const CurveG1Rep& b) { return fp12_equal(a.value, b.value); }

}  // namespace pmod::detail
