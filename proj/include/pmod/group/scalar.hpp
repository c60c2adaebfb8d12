#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "pmod/common/bytes.hpp"

namespace pmod {

class RandomSource;

// Residue modulo the group order. Only a ScalarField can produce one, so the
// value is always reduced.
class Scalar {
 public:
  Scalar() = default;

  const mpz_class& value() const { return value_; }
  bool is_zero() const { return value_ == 0; }
  // 32-byte big-endian encoding.
  std::array<std::uint8_t, 32> to_bytes() const;
  std::string to_string() const { return value_.get_str(); }

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value_ == b.value_; }

 private:
  friend class ScalarField;
  explicit Scalar(mpz_class v) : value_(std::move(v)) {}
  mpz_class value_;
};

class ScalarField {
 public:
  // Throws InvalidArgument unless order is a prime below 2^256.
  explicit ScalarField(mpz_class order);

  const mpz_class& order() const { return order_; }

  Scalar zero() const { return Scalar(0); }
  Scalar one() const { return Scalar(1); }
  Scalar from_integer(const mpz_class& v) const;
  Scalar from_u64(std::uint64_t v) const;
  Scalar from_i64(std::int64_t v) const;
  // Strict decoding: exactly 32 bytes, value < order.
  Scalar from_bytes(ByteView b) const;
  // Interprets arbitrary bytes as a big-endian integer and reduces it.
  Scalar reduce_bytes(ByteView b) const;

  Scalar add(const Scalar& a, const Scalar& b) const;
  Scalar sub(const Scalar& a, const Scalar& b) const;
  Scalar mul(const Scalar& a, const Scalar& b) const;
  Scalar neg(const Scalar& a) const;
  // Throws InvalidArgument for zero.
  Scalar inv(const Scalar& a) const;
  Scalar div(const Scalar& a, const Scalar& b) const { return mul(a, inv(b)); }

  Scalar random(RandomSource& rng) const;
  Scalar random_nonzero(RandomSource& rng) const;

 private:
  mpz_class order_;
};

}  // namespace pmod
