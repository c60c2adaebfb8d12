#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pmod/common/bytes.hpp"
#include "pmod/group/elements.hpp"
#include "pmod/group/scalar.hpp"

namespace pmod {

class RandomSource;

namespace detail {
class GroupBackend;
}

// Operation counts. Exponentiations, multiplications and divisions each count
// as one group operation; hashing to G0 is not counted.
struct OpCounts {
  std::uint64_t g0_ops = 0;
  std::uint64_t g1_ops = 0;
  std::uint64_t pairings = 0;

  friend OpCounts operator-(const OpCounts& a, const OpCounts& b) {
    return {a.g0_ops - b.g0_ops, a.g1_ops - b.g1_ops, a.pairings - b.pairings};
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

// Symmetric bilinear group e: G0 x G0 -> G1 of prime order p with generator g.
//
// Contexts are interned: bls12_381() and transparent(p) return the same
// instance for the same parameters, so elements deserialized anywhere in the
// process are compatible. Everything except the op counters is immutable.
class PairingContext {
 public:
  static std::shared_ptr<const PairingContext> bls12_381();
  static std::shared_ptr<const PairingContext> transparent(const mpz_class& prime = 101);
  // Accepts the strings produced by backend_id(): "bls12-381" or "transparent:<p>".
  static std::shared_ptr<const PairingContext> from_backend_id(std::string_view id);

  ~PairingContext();
  PairingContext(const PairingContext&) = delete;
  PairingContext& operator=(const PairingContext&) = delete;

  BackendKind kind() const { return kind_; }
  std::string backend_id() const;
  std::uint64_t id() const { return id_; }
  const ScalarField& field() const { return field_; }
  const mpz_class& group_order() const { return field_.order(); }

  const G0Element& generator() const { return generator_; }
  G0Element g0_identity() const;
  G1Element g1_identity() const;

  G0Element exp(const G0Element& x, const Scalar& a) const;
  G0Element mul(const G0Element& x, const G0Element& y) const;
  G1Element exp(const G1Element& x, const Scalar& a) const;
  G1Element mul(const G1Element& x, const G1Element& y) const;
  G1Element div(const G1Element& x, const G1Element& y) const;
  G1Element pair(const G0Element& a, const G0Element& b) const;

  G0Element hash_to_g0(ByteView label) const;
  G0Element hash_to_g0(std::string_view label) const { return hash_to_g0(as_bytes(label)); }

  Scalar random_scalar(RandomSource& rng) const { return field_.random(rng); }
  // e(g,g)^t for uniform t. Not counted.
  G1Element random_g1(RandomSource& rng) const;

  bool is_identity(const G0Element& x) const;
  bool is_identity(const G1Element& x) const;

  // Discrete logarithms, available in transparent mode only.
  std::optional<Scalar> known_exponent(const G0Element& x) const;
  std::optional<Scalar> known_exponent(const G1Element& x) const;

  // Canonical encoding: backend tag, u32 length, payload.
  void write(ByteWriter& w, const G0Element& x) const;
  void write(ByteWriter& w, const G1Element& x) const;
  G0Element read_g0(ByteReader& r) const;
  G1Element read_g1(ByteReader& r) const;
  Bytes serialize(const G0Element& x) const;
  Bytes serialize(const G1Element& x) const;
  G0Element deserialize_g0(ByteView b) const;
  G1Element deserialize_g1(ByteView b) const;

  OpCounts op_counters() const;
  void reset_op_counters() const;

 private:
  PairingContext(BackendKind kind, std::unique_ptr<detail::GroupBackend> backend);

  void check(const G0Element& x) const;
  void check(const G1Element& x) const;

  BackendKind kind_;
  std::uint64_t id_;
  std::unique_ptr<detail::GroupBackend> backend_;
  ScalarField field_;
  G0Element generator_;
  G1Element egg_;

  mutable std::atomic<std::uint64_t> g0_ops_{0};
  mutable std::atomic<std::uint64_t> g1_ops_{0};
  mutable std::atomic<std::uint64_t> pairings_{0};
};

using ContextPtr = std::shared_ptr<const PairingContext>;

}  // namespace pmod
