#include "pmod/group/pairing_context.hpp"

#include <map>
#include <mutex>

#include "backend.hpp"
#include "pmod/common/error.hpp"
#include "pmod/common/random.hpp"

namespace pmod {

namespace detail {
bool curve_g0_equal(const CurveG0Rep& a, const CurveG0Rep& b);
bool curve_g1_equal(const CurveG1Rep& a, const CurveG1Rep& b);
}  // namespace detail

bool operator==(const G0Element& a, const G0Element& b) {
  if (a.ctx_ != b.ctx_ || a.rep_.index() != b.rep_.index()) return false;
  if (auto* t = std::get_if<detail::TransparentRep>(&a.rep_))
    return t->exponent == std::get<detail::TransparentRep>(b.rep_).exponent;
  if (auto* c = std::get_if<detail::CurveG0Rep>(&a.rep_))
    return detail::curve_g0_equal(*c, std::get<detail::CurveG0Rep>(b.rep_));
  return true;
}

bool operator==(const G1Element& a, const G1Element& b) {
  if (a.ctx_ != b.ctx_ || a.rep_.index() != b.rep_.index()) return false;
  if (auto* t = std::get_if<detail::TransparentRep>(&a.rep_))
    return t->exponent == std::get<detail::TransparentRep>(b.rep_).exponent;
  if (auto* c = std::get_if<detail::CurveG1Rep>(&a.rep_))
    return detail::curve_g1_equal(*c, std::get<detail::CurveG1Rep>(b.rep_));
  return true;
}

namespace {

std::uint64_t next_context_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

struct Registry {
  std::mutex mu;
  ContextPtr bls;
  std::map<mpz_class, ContextPtr> transparent;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

PairingContext::PairingContext(BackendKind kind, std::unique_ptr<detail::GroupBackend> backend)
    : kind_(kind),
      id_(next_context_id()),
      backend_(std::move(backend)),
      field_(backend_->order()),
      generator_(id_, backend_->g0_generator()),
      egg_(id_, backend_->pair(generator_.rep(), generator_.rep())) {
  if (backend_->g1_is_identity(egg_.rep())) throw InvalidArgument("degenerate pairing");
}

PairingContext::~PairingContext() = default;

ContextPtr PairingContext::bls12_381() {
  auto& reg = registry();
  std::lock_guard lock(reg.mu);
  if (!reg.bls)
    reg.bls = ContextPtr(
        new PairingContext(BackendKind::bls12_381, detail::make_bls12_381_backend()));
  return reg.bls;
}

ContextPtr PairingContext::transparent(const mpz_class& prime) {
  auto& reg = registry();
  std::lock_guard lock(reg.mu);
  auto it = reg.transparent.find(prime);
  if (it != reg.transparent.end()) return it->second;
  // The field constructor rejects composite moduli.
  ScalarField check(prime);
  auto ctx = ContextPtr(
      new PairingContext(BackendKind::transparent, detail::make_transparent_backend(prime)));
  reg.transparent.emplace(prime, ctx);
  return ctx;
}

ContextPtr PairingContext::from_backend_id(std::string_view id) {
  if (id == "bls12-381") return bls12_381();
  constexpr std::string_view prefix = "transparent:";
  if (id.substr(0, prefix.size()) == prefix) {
    mpz_class p;
    if (p.set_str(std::string(id.substr(prefix.size())), 10) != 0)
      throw FormatError("bad transparent modulus in backend id");
    return transparent(p);
  }
  if (id == "transparent") return transparent();
  throw FormatError("unknown backend id '" + std::string(id) + "'");
}

std::string PairingContext::backend_id() const {
  if (kind_ == BackendKind::bls12_381) return "bls12-381";
  return "transparent:" + group_order().get_str();
}

void PairingContext::check(const G0Element& x) const {
  if (x.context_id() != id_) throw ContextMismatch("G0 element from a different context");
}

void PairingContext::check(const G1Element& x) const {
  if (x.context_id() != id_) throw ContextMismatch("G1 element from a different context");
}

G0Element PairingContext::g0_identity() const { return {id_, backend_->g0_identity()}; }
G1Element PairingContext::g1_identity() const { return {id_, backend_->g1_identity()}; }

G0Element PairingContext::exp(const G0Element& x, const Scalar& a) const {
  check(x);
  g0_ops_.fetch_add(1, std::memory_order_relaxed);
  return {id_, backend_->g0_exp(x.rep(), a.value())};
}

G0Element PairingContext::mul(const G0Element& x, const G0Element& y) const {
  check(x);
  check(y);
  g0_ops_.fetch_add(1, std::memory_order_relaxed);
  return {id_, backend_->g0_mul(x.rep(), y.rep())};
}

G1Element PairingContext::exp(const G1Element& x, const Scalar& a) const {
  check(x);
  g1_ops_.fetch_add(1, std::memory_order_relaxed);
  return {id_, backend_->g1_exp(x.rep(), a.value())};
}

G1Element PairingContext::mul(const G1Element& x, const G1Element& y) const {
  check(x);
  check(y);
  g1_ops_.fetch_add(1, std::memory_order_relaxed);
  return {id_, backend_->g1_mul(x.rep(), y.rep())};
}

G1Element PairingContext::div(const G1Element& x, const G1Element& y) const {
  check(x);
  check(y);
  g1_ops_.fetch_add(1, std::memory_order_relaxed);
  return {id_, backend_->g1_mul(x.rep(), backend_->g1_inverse(y.rep()))};
}

G1Element PairingContext::pair(const G0Element& a, const G0Element& b) const {
  check(a);
  check(b);
  pairings_.fetch_add(1, std::memory_order_relaxed);
  return {id_, backend_->pair(a.rep(), b.rep())};
}

G0Element PairingContext::hash_to_g0(ByteView label) const {
  return {id_, backend_->hash_to_g0(label)};
}

G1Element PairingContext::random_g1(RandomSource& rng) const {
  return {id_, backend_->g1_exp(egg_.rep(), field_.random(rng).value())};
}

bool PairingContext::is_identity(const G0Element& x) const {
  check(x);
  return backend_->g0_is_identity(x.rep());
}

bool PairingContext::is_identity(const G1Element& x) const {
  check(x);
  return backend_->g1_is_identity(x.rep());
}

std::optional<Scalar> PairingContext::known_exponent(const G0Element& x) const {
  check(x);
  auto log = backend_->g0_log(x.rep());
  if (!log) return std::nullopt;
  return field_.from_integer(*log);
}

std::optional<Scalar> PairingContext::known_exponent(const G1Element& x) const {
  check(x);
  auto log = backend_->g1_log(x.rep());
  if (!log) return std::nullopt;
  return field_.from_integer(*log);
}

void PairingContext::write(ByteWriter& w, const G0Element& x) const {
  check(x);
  w.u8(static_cast<std::uint8_t>(kind_));
  w.blob(backend_->g0_encode(x.rep()));
}

void PairingContext::write(ByteWriter& w, const G1Element& x) const {
  check(x);
  w.u8(static_cast<std::uint8_t>(kind_));
  w.blob(backend_->g1_encode(x.rep()));
}

G0Element PairingContext::read_g0(ByteReader& r) const {
  if (r.u8() != static_cast<std::uint8_t>(kind_))
    throw ContextMismatch("element encoded for a different backend");
  return {id_, backend_->g0_decode(r.blob())};
}

G1Element PairingContext::read_g1(ByteReader& r) const {
  if (r.u8() != static_cast<std::uint8_t>(kind_))
    throw ContextMismatch("element encoded for a different backend");
  return {id_, backend_->g1_decode(r.blob())};
}

Bytes PairingContext::serialize(const G0Element& x) const {
  ByteWriter w;
  write(w, x);
  return std::move(w).bytes();
}

Bytes PairingContext::serialize(const G1Element& x) const {
  ByteWriter w;
  write(w, x);
  return std::move(w).bytes();
}

G0Element PairingContext::deserialize_g0(ByteView b) const {
  ByteReader r(b);
  auto x = read_g0(r);
  r.expect_done();
  return x;
}

G1Element PairingContext::deserialize_g1(ByteView b) const {
  ByteReader r(b);
  auto x = read_g1(r);
  r.expect_done();
  return x;
}

OpCounts PairingContext::op_counters() const {
  return {g0_ops_.load(std::memory_order_relaxed), g1_ops_.load(std::memory_order_relaxed),
          pairings_.load(std::memory_order_relaxed)};
}

void PairingContext::reset_op_counters() const {
  g0_ops_.store(0);
  g1_ops_.store(0);
  pairings_.store(0);
}

}  // namespace pmod
