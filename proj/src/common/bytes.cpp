#include "pmod/common/bytes.hpp"

#include <openssl/evp.h>

#include "pmod/common/error.hpp"

namespace pmod {

std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto c : b) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xf]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw FormatError("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string base64_encode(ByteView b) {
  std::string out(4 * ((b.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), b.data(),
                          static_cast<int>(b.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
  Bytes out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw FormatError("invalid base64");
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v >> 8));
  u8(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::blob(ByteView b) {
  if (b.size() > 0xffffffffu) throw InvalidArgument("blob too large");
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

ByteView ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw FormatError("unexpected end of input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto b = raw(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32() {
  auto b = raw(4);
  std::uint32_t v = 0;
  for (auto c : b) v = (v << 8) | c;
  return v;
}

std::uint64_t ByteReader::u64() {
  auto b = raw(8);
  std::uint64_t v = 0;
  for (auto c : b) v = (v << 8) | c;
  return v;
}

ByteView ByteReader::blob() { return raw(u32()); }

std::string ByteReader::str() { return to_string(blob()); }

void ByteReader::expect_done() const {
  if (!done()) throw FormatError("trailing bytes after encoded value");
}

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::format: return "format";
    case ErrorKind::context_mismatch: return "context_mismatch";
    case ErrorKind::parse: return "parse";
    case ErrorKind::policy_not_satisfied: return "policy_not_satisfied";
    case ErrorKind::no_level_satisfied: return "no_level_satisfied";
    case ErrorKind::authentication: return "authentication";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::unauthorized: return "unauthorized";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::optional<ErrorKind> error_kind_from_name(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::io); ++k)
    if (name == error_kind_name(static_cast<ErrorKind>(k))) return static_cast<ErrorKind>(k);
  return std::nullopt;
}

void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::invalid_argument: throw InvalidArgument(what);
    case ErrorKind::format:
    case ErrorKind::parse: throw FormatError(what);
    case ErrorKind::context_mismatch: throw ContextMismatch(what);
    case ErrorKind::policy_not_satisfied: throw PolicyNotSatisfied(what);
    case ErrorKind::no_level_satisfied: throw NoLevelSatisfied(what);
    case ErrorKind::authentication: throw AuthenticationFailure(what);
    case ErrorKind::integrity: throw IntegrityError(what);
    case ErrorKind::not_found: throw NotFound(what);
    case ErrorKind::unauthorized: throw Unauthorized(what);
    case ErrorKind::io: throw IoError(what);
  }
  throw Error(kind, what);
}

}  // namespace pmod
