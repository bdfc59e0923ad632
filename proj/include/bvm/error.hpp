#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bvm {

enum class ErrorKind {
  kMixedAlgebras,
  kZeroElement,
  kNotMaximal,
  kNotAntichain,
  kSizeOverflow,
  kNoFIP,
  kBadIndexing,
  kParseError,
  kUnknownSymbol,
  kCaptureError,
  kCapExceeded,
  kUnboundVariable,
  kFiberCountMismatch,
  kInvalidTuple,
  kForeignParameter,
  kNotUltrafilter,
  kAxiomViolation,
  kBadConstraint,
  kNotElementary,
  kIndexMismatch,
  kEmptyJoin,
  kNotInFilter,
  kPreconditionFailed,
  kNotRealized,
  kFiberWitnessMissing,
  kNotDownwardClosed,
  kNotInjective,
  kZeroImage,
  kNotSurjective,
  kNotPregood,
  kFormatError,
};

std::string_view error_kind_name(ErrorKind kind);

/// Base of every error raised by the library. `kind()` is stable and is what
/// callers should branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Raised by the abstract B-valued structure validator; `clause()` names the
/// violated structure axiom (3 for the equality/congruence schema, 7 for
/// distinct elements being provably equal).
class AxiomViolation : public Error {
 public:
  AxiomViolation(int clause, const std::string& message);
  int clause() const noexcept { return clause_; }

 private:
  int clause_;
};

class FormatError : public Error {
 public:
  FormatError(std::string pointer, const std::string& message);
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace bvm
