#pragma once

#include <cstddef>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>

namespace pmod {

enum class ErrorKind {
  invalid_argument,
  format,
  context_mismatch,
  parse,
  policy_not_satisfied,
  no_level_satisfied,
  authentication,
  integrity,
  not_found,
  unauthorized,
  io,
};

const char* error_kind_name(ErrorKind kind);
// Inverse of error_kind_name; nullopt for unknown names.
std::optional<ErrorKind> error_kind_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what) : Error(K, what) {}
};

using InvalidArgument = KindedError<ErrorKind::invalid_argument>;
using FormatError = KindedError<ErrorKind::format>;
using ContextMismatch = KindedError<ErrorKind::context_mismatch>;
using PolicyNotSatisfied = KindedError<ErrorKind::policy_not_satisfied>;
using NoLevelSatisfied = KindedError<ErrorKind::no_level_satisfied>;
using AuthenticationFailure = KindedError<ErrorKind::authentication>;
using IntegrityError = KindedError<ErrorKind::integrity>;
using NotFound = KindedError<ErrorKind::not_found>;
using Unauthorized = KindedError<ErrorKind::unauthorized>;
using IoError = KindedError<ErrorKind::io>;

// Policy syntax errors carry the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(ErrorKind::parse, what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Throws the typed error for kind. Parse errors lose their position and
// surface as FormatError.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

}  // namespace pmod
