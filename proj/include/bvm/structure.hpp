#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bvm/compiled.hpp"
#include "bvm/logic.hpp"

namespace bvm {

/// An ordinary finite structure. Relation tables are indexed by argument
/// tuples read as base-`size` numerals with the first argument most
/// significant; function tables likewise.
class Structure {
 public:
  Structure(Signature signature, int size);

  const Signature& signature() const noexcept { return signature_; }
  int size() const noexcept { return size_; }

  bool holds(int relation, std::span<const int> args) const;
  void set_holds(int relation, std::span<const int> args, bool value);
  int apply(int function, std::span<const int> args) const;
  void set_value(int function, std::span<const int> args, int value);
  int constant(int index) const { return constants_.at(static_cast<std::size_t>(index)); }
  void set_constant(int index, int value);

  const std::vector<std::uint8_t>& relation_table(int relation) const {
    return relations_.at(static_cast<std::size_t>(relation));
  }
  const std::vector<int>& function_table(int function) const {
    return functions_.at(static_cast<std::size_t>(function));
  }
  const std::vector<int>& constants() const noexcept { return constants_; }

  std::size_t tuple_index(std::span<const int> args) const;

  friend bool operator==(const Structure&, const Structure&) = default;

 private:
  Signature signature_;
  int size_;
  std::vector<std::vector<std::uint8_t>> relations_;
  std::vector<std::vector<int>> functions_;
  std::vector<int> constants_;
};

/// Values for free variables (by name) and parameters (#i ↦ params[i]).
struct Assignment {
  std::vector<std::pair<std::string, int>> variables;
  std::vector<int> params;
};

/// Tarskian truth. Throws UnboundVariable when the assignment misses a free
/// variable or parameter, UnknownSymbol for symbols outside the signature.
bool eval_ordinary(const Structure& structure, const Formula& formula,
                   const Assignment& assignment = {});

/// Evaluation of a compiled formula; `env` must have slot_count entries with
/// the free slots filled in.
bool eval_compiled(const Structure& structure, const detail::CompiledFormula& formula,
                   std::span<int> env, std::span<const int> params);

/// Isomorphism check for a given candidate map from a's domain to b's domain.
bool is_isomorphism(const Structure& a, const Structure& b, std::span<const int> map);

/// Strict linear order 0 < 1 < ... < size-1 on the binary relation "<".
Structure linear_order(int size);

}  // namespace bvm
