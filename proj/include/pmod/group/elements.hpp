#pragma once

#include <cstdint>
#include <variant>

#include <blst.h>
#include <gmpxx.h>

namespace pmod {

enum class BackendKind : std::uint8_t {
  bls12_381 = 1,
  transparent = 2,
};

namespace detail {

// Transparent group: an element is represented by its discrete logarithm.
struct TransparentRep {
  mpz_class exponent;
};

// A logical G0 element on BLS12-381. Elements derived from the generator keep
// their image in both source groups; hashed elements only exist in G2, which
// is enough because they are always paired against a generator-derived one.
struct CurveG0Rep {
  bool has_g1 = false;
  blst_p1 g1{};
  blst_p2 g2{};
};

struct CurveG1Rep {
  blst_fp12 value{};
};

}  // namespace detail

class G0Element {
 public:
  using Rep = std::variant<std::monostate, detail::TransparentRep, detail::CurveG0Rep>;

  G0Element() = default;
  G0Element(std::uint64_t context_id, Rep rep) : ctx_(context_id), rep_(std::move(rep)) {}

  bool valid() const { return ctx_ != 0; }
  std::uint64_t context_id() const { return ctx_; }
  const Rep& rep() const { return rep_; }

  friend bool operator==(const G0Element& a, const G0Element& b);

 private:
  std::uint64_t ctx_ = 0;
  Rep rep_;
};

class G1Element {
 public:
  using Rep = std::variant<std::monostate, detail::TransparentRep, detail::CurveG1Rep>;

  G1Element() = default;
  G1Element(std::uint64_t context_id, Rep rep) : ctx_(context_id), rep_(std::move(rep)) {}

  bool valid() const { return ctx_ != 0; }
  std::uint64_t context_id() const { return ctx_; }
  const Rep& rep() const { return rep_; }

  friend bool operator==(const G1Element& a, const G1Element& b);

 private:
  std::uint64_t ctx_ = 0;
  Rep rep_;
};

}  // namespace pmod
