#pragma once

// Formulas with symbols resolved to signature indices and variables resolved
// to environment slots. Free variables occupy slots 0..free_count-1 in the
// order requested at compile time; each binder at depth d uses slot
// free_count + d.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bvm/logic.hpp"

namespace bvm::detail {

struct CTerm {
  enum class Kind : std::uint8_t { kSlot, kParam, kConst, kFunc };
  Kind kind = Kind::kSlot;
  int index = 0;
  std::vector<CTerm> args;
};

struct CNode {
  enum class Kind : std::uint8_t {
    kTrue, kFalse, kEquals, kRelation, kNot, kAnd, kOr, kImplies, kExists, kForall
  };
  Kind kind = Kind::kTrue;
  /// Relation index for kRelation; bound slot for quantifiers.
  int index = -1;
  std::vector<CTerm> terms;
  std::vector<CNode> kids;
};

struct CompiledFormula {
  CNode root;
  int free_count = 0;
  int slot_count = 0;
  /// One more than the largest parameter index used.
  int param_count = 0;
};

/// Throws UnknownSymbol for symbols outside the signature and UnboundVariable
/// for free variables missing from `free_order`.
CompiledFormula compile(const Formula& formula, const Signature& signature,
                        std::span<const std::string> free_order = {});

}  // namespace bvm::detail
