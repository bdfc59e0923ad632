#pragma once

// Boolean ultrapowers M^B of a finite structure over a finite algebra.
//
// An element of M^B is canonically a function atoms -> M. The ultrapower is
// the full product bundle with one copy of M per atom; element k is the
// function whose values, read atom 0 first, spell k in base |M|.

#include <optional>
#include <span>
#include <vector>

#include "bvm/boolean_algebra.hpp"
#include "bvm/bvalued.hpp"
#include "bvm/structure.hpp"

namespace bvm {

/// Element cap for ultrapowers; |M|^atoms must not exceed it.
inline constexpr std::size_t kUltrapowerElementCap = 4096;

struct BooleanUltrapower {
  Structure base;
  BoolAlg algebra;
  BValuedStructure structure;

  /// Canonical element index of an atom -> M function.
  int index_of(std::span<const int> function) const;
  /// The atom -> M function of an element.
  std::vector<int> function_of(int index) const;
};

/// Throws SizeOverflow past kUltrapowerElementCap.
BooleanUltrapower boolean_ultrapower(const Structure& base, const BoolAlg& algebra);

/// A partition element as a map M -> B (value per base element).
using Partition = std::vector<Element>;

/// Throws NotAntichain for overlapping values, NotMaximal when the values
/// do not join to 1.
std::vector<int> function_from_partition(const BoolAlg& algebra, const Partition& partition);
Partition partition_from_function(const BoolAlg& algebra, int base_size, std::span<const int> function);

/// Join over tuples m̄ with M ⊨ φ(m̄) of the meets of args[i](m_i); the
/// formula's parameter #i takes args[i].
Element ultrapower_value(const Structure& base, const BoolAlg& algebra, const Formula& formula,
                         std::span<const Partition> args);

/// i(a): the partition with value 1 at a.
std::vector<int> pre_los(const BooleanUltrapower& ultrapower);

/// M as a {0,1}-valued structure over the algebra: the diagonal bundle.
BValuedStructure diagonal(const Structure& base, const BoolAlg& algebra);

struct InversePartition {
  std::vector<Element> antichain;
  std::vector<int> labels;
};

/// Atom e goes to the label of the block containing it. Throws NotMaximal
/// unless the antichain is maximal.
std::vector<int> function_from_inverse(const BoolAlg& algebra, const InversePartition& ip);
bool equivalent(const BoolAlg& algebra, const InversePartition& a, const InversePartition& b);

/// Value through the common refinement of the antichains: the join of the
/// nonzero meets c = c_0 ∧ ... ∧ c_{k-1} with M ⊨ φ(f_0(c_0), ...).
Element inverse_partition_value(const Structure& base, const BoolAlg& algebra, const Formula& formula,
                                std::span<const InversePartition> args);

struct LosReport {
  int atom = 0;
  int rank = 0;
  /// j = specialization ∘ pre-Łoś is elementary at `rank`.
  bool elementary = true;
  std::optional<FormulaWitness> counterexample;
  /// Quotient element of M^B/U -> element of M (the value at U's atom).
  std::vector<int> isomorphism;
  bool isomorphism_ok = false;
};

LosReport los_check(const Structure& base, const BoolAlg& algebra, const PrincipalFilter& ultrafilter, int rank,
                    const CheckOptions& options = {});

}  // namespace bvm
