#include <nlohmann/json.hpp>

#include "pmod/abe/abe.hpp"
#include "pmod/common/error.hpp"
#include "pmod/policy/policy_text.hpp"

namespace pmod::abe {

namespace {

constexpr std::uint8_t kVersion = 1;
enum class Kind : std::uint8_t { public_key = 1, master_key = 2, private_key = 3, ciphertext = 4 };

ByteWriter header(Kind kind, const PairingContext& ctx) {
  ByteWriter w;
  w.raw(as_bytes("PMOD"));
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(kind));
  w.str(ctx.backend_id());
  return w;
}

std::string read_header(ByteReader& r, Kind kind) {
  if (to_string(r.raw(4)) != "PMOD") throw FormatError("bad magic");
  if (r.u8() != kVersion) throw FormatError("unsupported encoding version");
  if (r.u8() != static_cast<std::uint8_t>(kind)) throw FormatError("unexpected object kind");
  return r.str();
}

ContextPtr context_for(ByteReader& r, Kind kind) {
  const std::string id = read_header(r, kind);
  try {
    return PairingContext::from_backend_id(id);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("unknown backend: ") + e.what());
  }
}

}  // namespace

std::string encoded_backend_id(ByteView b) {
  ByteReader r(b);
  if (to_string(r.raw(4)) != "PMOD") throw FormatError("bad magic");
  if (r.u8() != kVersion) throw FormatError("unsupported encoding version");
  r.u8();
  return r.str();
}

Bytes serialize(const PublicKey& pk) {
  auto w = header(Kind::public_key, *pk.ctx);
  pk.ctx->write(w, pk.g);
  pk.ctx->write(w, pk.B);
  pk.ctx->write(w, pk.B_inv);
  pk.ctx->write(w, pk.egg_alpha);
  return std::move(w).bytes();
}

PublicKey deserialize_public_key(ByteView b) {
  ByteReader r(b);
  auto ctx = context_for(r, Kind::public_key);
  PublicKey pk{ctx, ctx->read_g0(r), ctx->read_g0(r), ctx->read_g0(r), ctx->read_g1(r)};
  r.expect_done();
  if (!(pk.g == ctx->generator())) throw FormatError("public key generator mismatch");
  return pk;
}

Bytes serialize(const MasterKey& mk) {
  auto w = header(Kind::master_key, *mk.ctx);
  w.raw(mk.beta.to_bytes());
  mk.ctx->write(w, mk.g_alpha);
  return std::move(w).bytes();
}

MasterKey deserialize_master_key(ByteView b) {
  ByteReader r(b);
  auto ctx = context_for(r, Kind::master_key);
  Scalar beta;
  try {
    beta = ctx->field().from_bytes(r.raw(32));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  if (beta.is_zero()) throw FormatError("master key has beta = 0");
  MasterKey mk{ctx, beta, ctx->read_g0(r)};
  r.expect_done();
  return mk;
}

Bytes serialize(const PrivateKey& sk) {
  auto w = header(Kind::private_key, *sk.ctx);
  sk.ctx->write(w, sk.D);
  w.u32(static_cast<std::uint32_t>(sk.components.size()));
  for (const auto& [attr, key] : sk.components) {
    w.str(attr);
    sk.ctx->write(w, key.D);
    sk.ctx->write(w, key.D_prime);
  }
  return std::move(w).bytes();
}

PrivateKey deserialize_private_key(ByteView b) {
  ByteReader r(b);
  PrivateKey sk;
  sk.ctx = context_for(r, Kind::private_key);
  sk.D = sk.ctx->read_g0(r);
  const auto n = r.u32();
  if (n == 0) throw FormatError("private key without attributes");
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string attr = r.str();
    if (!policy::is_valid_attribute(attr)) throw FormatError("invalid attribute label");
    auto D = sk.ctx->read_g0(r);
    auto Dp = sk.ctx->read_g0(r);
    if (!sk.components.emplace(attr, AttributeKey{D, Dp}).second)
      throw FormatError("duplicate attribute in private key");
    sk.attributes.insert(std::move(attr));
  }
  r.expect_done();
  return sk;
}

Bytes serialize(const AbeCiphertext& ct) {
  check_structure(ct);
  auto w = header(Kind::ciphertext, *ct.ctx);
  w.str(policy::to_canonical_json(ct.tree));
  ct.ctx->write(w, ct.C_tilde);
  ct.ctx->write(w, ct.C);
  w.u32(static_cast<std::uint32_t>(ct.leaves.size()));
  for (const auto& [id, comp] : ct.leaves) {
    w.u32(static_cast<std::uint32_t>(id));
    ct.ctx->write(w, comp.C);
    ct.ctx->write(w, comp.C_prime);
  }
  return std::move(w).bytes();
}

AbeCiphertext deserialize_ciphertext(const ContextPtr& ctx, ByteView b) {
  ByteReader r(b);
  if (read_header(r, Kind::ciphertext) != ctx->backend_id())
    throw ContextMismatch("ciphertext was produced under a different backend");
  std::optional<policy::AccessTree> tree;
  try {
    tree.emplace(policy::tree_from_json(nlohmann::json::parse(r.str())));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ciphertext policy: ") + e.what());
  }
  AbeCiphertext ct{ctx, *tree, ctx->read_g1(r), ctx->read_g0(r), {}};
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t id = r.u32();
    if (id >= ct.tree.node_count() || !ct.tree.node(id).is_leaf())
      throw FormatError("leaf component for a non-leaf node");
    auto C = ctx->read_g0(r);
    auto Cp = ctx->read_g0(r);
    if (!ct.leaves.emplace(id, LeafComponents{C, Cp}).second)
      throw FormatError("duplicate leaf component");
  }
  r.expect_done();
  check_structure(ct);
  return ct;
}

}  // namespace pmod::abe
