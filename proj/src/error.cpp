#include "bvm/error.hpp"

namespace bvm {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMixedAlgebras: return "MixedAlgebras";
    case ErrorKind::kZeroElement: return "ZeroElement";
    case ErrorKind::kNotMaximal: return "NotMaximal";
    case ErrorKind::kNotAntichain: return "NotAntichain";
    case ErrorKind::kSizeOverflow: return "SizeOverflow";
    case ErrorKind::kNoFIP: return "NoFIP";
    case ErrorKind::kBadIndexing: return "BadIndexing";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kUnknownSymbol: return "UnknownSymbol";
    case ErrorKind::kCaptureError: return "CaptureError";
    case ErrorKind::kCapExceeded: return "CapExceeded";
    case ErrorKind::kUnboundVariable: return "UnboundVariable";
    case ErrorKind::kFiberCountMismatch: return "FiberCountMismatch";
    case ErrorKind::kInvalidTuple: return "InvalidTuple";
    case ErrorKind::kForeignParameter: return "ForeignParameter";
    case ErrorKind::kNotUltrafilter: return "NotUltrafilter";
    case ErrorKind::kAxiomViolation: return "AxiomViolation";
    case ErrorKind::kBadConstraint: return "BadConstraint";
    case ErrorKind::kNotElementary: return "NotElementary";
    case ErrorKind::kIndexMismatch: return "IndexMismatch";
    case ErrorKind::kEmptyJoin: return "EmptyJoin";
    case ErrorKind::kNotInFilter: return "NotInFilter";
    case ErrorKind::kPreconditionFailed: return "PreconditionFailed";
    case ErrorKind::kNotRealized: return "NotRealized";
    case ErrorKind::kFiberWitnessMissing: return "FiberWitnessMissing";
    case ErrorKind::kNotDownwardClosed: return "NotDownwardClosed";
    case ErrorKind::kNotInjective: return "NotInjective";
    case ErrorKind::kZeroImage: return "ZeroImage";
    case ErrorKind::kNotSurjective: return "NotSurjective";
    case ErrorKind::kNotPregood: return "NotPregood";
    case ErrorKind::kFormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind) {}

ParseError::ParseError(std::size_t offset, const std::string& message)
    : Error(ErrorKind::kParseError,
            "offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

AxiomViolation::AxiomViolation(int clause, const std::string& message)
    : Error(ErrorKind::kAxiomViolation,
            "clause " + std::to_string(clause) + ": " + message),
      clause_(clause) {}

FormatError::FormatError(std::string pointer, const std::string& message)
    : Error(ErrorKind::kFormatError,
            (pointer.empty() ? std::string("/") : pointer) + ": " + message),
      pointer_(std::move(pointer)) {}

}  // namespace bvm
