#pragma once

#include <memory>
#include <optional>

#include "pmod/common/bytes.hpp"
#include "pmod/group/elements.hpp"

namespace pmod::detail {

// Raw group arithmetic without counting or context checks. Exponents are
// already reduced modulo the group order.
class GroupBackend {
 public:
  virtual ~GroupBackend() = default;

  virtual const mpz_class& order() const = 0;

  virtual G0Element::Rep g0_generator() const = 0;
  virtual G0Element::Rep g0_identity() const = 0;
  virtual G0Element::Rep g0_exp(const G0Element::Rep& x, const mpz_class& a) const = 0;
  virtual G0Element::Rep g0_mul(const G0Element::Rep& x, const G0Element::Rep& y) const = 0;
  virtual bool g0_is_identity(const G0Element::Rep& x) const = 0;
  virtual G0Element::Rep hash_to_g0(ByteView label) const = 0;
  virtual Bytes g0_encode(const G0Element::Rep& x) const = 0;
  virtual G0Element::Rep g0_decode(ByteView payload) const = 0;
  virtual std::optional<mpz_class> g0_log(const G0Element::Rep&) const { return std::nullopt; }

  virtual G1Element::Rep g1_identity() const = 0;
  virtual G1Element::Rep g1_exp(const G1Element::Rep& x, const mpz_class& a) const = 0;
  virtual G1Element::Rep g1_mul(const G1Element::Rep& x, const G1Element::Rep& y) const = 0;
  virtual G1Element::Rep g1_inverse(const G1Element::Rep& x) const = 0;
  virtual bool g1_is_identity(const G1Element::Rep& x) const = 0;
  virtual Bytes g1_encode(const G1Element::Rep& x) const = 0;
  virtual G1Element::Rep g1_decode(ByteView payload) const = 0;
  virtual std::optional<mpz_class> g1_log(const G1Element::Rep&) const { return std::nullopt; }

  virtual G1Element::Rep pair(const G0Element::Rep& a, const G0Element::Rep& b) const = 0;
};

std::unique_ptr<GroupBackend> make_transparent_backend(const mpz_class& prime);
std::unique_ptr<GroupBackend> make_bls12_381_backend();

}  // namespace pmod::detail
