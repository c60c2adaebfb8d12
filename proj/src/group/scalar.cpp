#include "pmod/group/scalar.hpp"

#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod {

std::array<std::uint8_t, 32> Scalar::to_bytes() const {
  std::array<std::uint8_t, 32> out{};
  std::size_t count = 0;
  Bytes tmp((mpz_sizeinbase(value_.get_mpz_t(), 2) + 7) / 8 + 1);
  mpz_export(tmp.data(), &count, 1, 1, 1, 0, value_.get_mpz_t());
  std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(count),
            out.end() - static_cast<std::ptrdiff_t>(count));
  return out;
}

ScalarField::ScalarField(mpz_class order) : order_(std::move(order)) {
  if (order_ < 2 || mpz_sizeinbase(order_.get_mpz_t(), 2) > 256)
    throw InvalidArgument("group order must be in [2, 2^256)");
  if (mpz_probab_prime_p(order_.get_mpz_t(), 40) == 0)
    throw InvalidArgument("group order " + order_.get_str() + " is not prime");
}

Scalar ScalarField::from_integer(const mpz_class& v) const {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), order_.get_mpz_t());
  return Scalar(std::move(r));
}

Scalar ScalarField::from_u64(std::uint64_t v) const {
  mpz_class z;
  mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return from_integer(z);
}

Scalar ScalarField::from_i64(std::int64_t v) const {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  // -(v+1) avoids overflow at INT64_MIN.
  return neg(add(from_u64(static_cast<std::uint64_t>(-(v + 1))), one()));
}

Scalar ScalarField::from_bytes(ByteView b) const {
  if (b.size() != 32) throw FormatError("scalar encoding must be 32 bytes");
  mpz_class z;
  mpz_import(z.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  if (z >= order_) throw FormatError("scalar encoding is not reduced");
  return Scalar(std::move(z));
}

Scalar ScalarField::reduce_bytes(ByteView b) const {
  mpz_class z;
  if (!b.empty()) mpz_import(z.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return from_integer(z);
}

Scalar ScalarField::add(const Scalar& a, const Scalar& b) const {
  mpz_class r = a.value_ + b.value_;
  if (r >= order_) r -= order_;
  return Scalar(std::move(r));
}

Scalar ScalarField::sub(const Scalar& a, const Scalar& b) const {
  mpz_class r = a.value_ - b.value_;
  if (r < 0) r += order_;
  return Scalar(std::move(r));
}

Scalar ScalarField::mul(const Scalar& a, const Scalar& b) const {
  return from_integer(a.value_ * b.value_);
}

Scalar ScalarField::neg(const Scalar& a) const {
  if (a.is_zero()) return a;
  return Scalar(order_ - a.value_);
}

Scalar ScalarField::inv(const Scalar& a) const {
  if (a.is_zero()) throw InvalidArgument("zero has no inverse");
  mpz_class r;
  mpz_invert(r.get_mpz_t(), a.value_.get_mpz_t(), order_.get_mpz_t());
  return Scalar(std::move(r));
}

Scalar ScalarField::random(RandomSource& rng) const { return Scalar(rng.uniform(order_)); }

Scalar ScalarField::random_nonzero(RandomSource& rng) const {
  for (;;) {
    Scalar s = random(rng);
    if (!s.is_zero()) return s;
  }
}

}  // namespace pmod
