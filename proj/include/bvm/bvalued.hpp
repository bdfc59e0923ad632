#pragma once

// Boolean-valued structures over finite algebras.
//
// Two representations:
//   bundle   - one ordinary structure per atom, elements are atom-indexed
//              tuples; every coordinate projection of the element set must be
//              onto its fiber.
//   abstract - element count plus value tables for equality, relations,
//              ||c = b|| for constants and ||f(a) = b|| for functions.
// Parameters #i in formulas denote element i of the structure.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bvm/boolean_algebra.hpp"
#include "bvm/logic.hpp"
#include "bvm/model_finder.hpp"
#include "bvm/parallel.hpp"
#include "bvm/structure.hpp"

namespace bvm {

struct BundleData {
  std::vector<Structure> fibers;
  /// elements[k][e] is the value of element k in fiber e.
  std::vector<std::vector<int>> elements;
};

struct AbstractData {
  int size = 0;
  /// size * size, row-major: equality[a * size + b] = ||a = b||.
  std::vector<Element> equality;
  /// Per relation, indexed like Structure relation tables.
  std::vector<std::vector<Element>> relations;
  /// Per constant c: constants[c][b] = ||c = b||.
  std::vector<std::vector<Element>> constants;
  /// Per function f of arity k: index (a_1..a_k, b) as a base-size numeral.
  std::vector<std::vector<Element>> functions;
};

class BValuedStructure {
 public:
  enum class Kind { kBundle, kAbstract };

  Kind kind() const noexcept { return kind_; }
  bool is_bundle() const noexcept { return kind_ == Kind::kBundle; }
  const BoolAlg& algebra() const noexcept { return algebra_; }
  const Signature& signature() const noexcept { return signature_; }
  /// Number of elements.
  int size() const noexcept;

  /// Throws PreconditionFailed on the wrong representation.
  const BundleData& bundle() const;
  const AbstractData& tables() const;

  friend BValuedStructure make_bundle(const BoolAlg&, std::vector<Structure>,
                                      std::optional<std::vector<std::vector<int>>>);
  friend BValuedStructure make_abstract(const BoolAlg&, const Signature&, AbstractData);

 private:
  BValuedStructure(Kind kind, BoolAlg algebra, Signature signature)
      : kind_(kind), algebra_(std::move(algebra)), signature_(std::move(signature)) {}

  Kind kind_;
  BoolAlg algebra_;
  Signature signature_;
  std::shared_ptr<const BundleData> bundle_;
  std::shared_ptr<const AbstractData> tables_;
};

/// Elements default to the full product in lexicographic order (atom 0 most
/// significant). Throws FiberCountMismatch, or InvalidTuple for a tuple out of
/// range, a duplicate tuple, or a projection that misses a fiber element.
BValuedStructure make_bundle(const BoolAlg& algebra, std::vector<Structure> fibers,
                             std::optional<std::vector<std::vector<int>>> elements = std::nullopt);

/// Validates the equality/congruence schema (clause 3), distinctness
/// (clause 7) and table shapes; throws AxiomViolation naming the clause.
BValuedStructure make_abstract(const BoolAlg& algebra, const Signature& signature,
                               AbstractData data);

BValuedStructure to_abstract(const BValuedStructure& m);
/// Specializes at every atom; element k becomes the tuple of its classes.
BValuedStructure to_bundle(const BValuedStructure& m);

enum class Engine { kRecursive, kCoordinatewise };

/// ||φ|| with free variables bound by name and #i bound to params[i] (both
/// element indices). Throws ForeignParameter for indices outside the
/// structure, UnboundVariable for missing bindings.
Element eval_bv(const BValuedStructure& m, const Formula& formula, const Assignment& assignment = {},
                Engine engine = Engine::kRecursive);

struct FormulaWitness {
  Formula formula = Formula::truth();
  std::vector<int> params;
  Element expected;
  Element actual;
};

struct CheckOptions {
  /// Formulas use parameters #0..#params-1, swept over all element tuples.
  int params = 1;
  int max_rank = 2;
  int max_size = 4;
  std::size_t max_count = 500000;
  Execution execution = Execution::kParallel;
};

struct FullnessReport {
  bool full = true;
  int rank = 0;
  std::size_t formulas_checked = 0;
  /// Formula φ(x): expected = ||∃x φ||, actual = the best single value found.
  std::optional<FormulaWitness> counterexample;
};

/// For every φ(x) of rank <= rank, some element attains ||∃x φ(x)||.
FullnessReport fullness_check(const BValuedStructure& m, int rank, const CheckOptions& options = {});

struct Specialization {
  Structure structure;
  /// Element index -> domain element of the specialization.
  std::vector<int> projection;
};

/// Bundles: the fiber at U's atom with projection to that coordinate.
/// Abstract: the quotient by a ~ b iff ||a = b|| ∈ U. Throws NotUltrafilter.
Specialization specialize(const BValuedStructure& m, const PrincipalFilter& ultrafilter);
/// Always the quotient construction, whatever the representation.
Specialization specialize_by_quotient(const BValuedStructure& m, const PrincipalFilter& ultrafilter);

struct SpecializationReport {
  bool holds = true;
  std::size_t formulas_checked = 0;
  std::optional<FormulaWitness> counterexample;
};

/// ||φ(ā)|| ∈ U iff the specialization satisfies φ at the projected ā, for all
/// sentences of rank <= rank with parameters.
SpecializationReport check_specialization(const BValuedStructure& m,
                                          const PrincipalFilter& ultrafilter, int rank,
                                          const CheckOptions& options = {});

/// Source element -> target element.
using ElementMap = std::vector<std::pair<int, int>>;

struct ElementaryReport {
  bool elementary = true;
  bool injective = true;
  int rank = 0;
  std::size_t formulas_checked = 0;
  /// expected = value in the source, actual = value in the target.
  std::optional<FormulaWitness> counterexample;
};

/// ||φ(ā)||_M = ||φ(f ā)||_N for every φ of rank <= rank and ā from the
/// domain of f. Throws MixedAlgebras / PreconditionFailed on incompatible
/// structures.
ElementaryReport check_elementary(const ElementMap& map, const BValuedStructure& source,
                                  const BValuedStructure& target, int rank,
                                  const CheckOptions& options = {});

struct ValueConstraint {
  BoolAlg algebra{1};
  Signature signature;
  /// Size of the parameter set X; formulas use #0..#parameters-1.
  int parameters = 0;
  std::vector<Formula> formulas;
  std::vector<Element> lower;
  std::vector<Element> upper;
};

struct CompactnessResult {
  FinderStatus status = FinderStatus::kNone;
  std::vector<FinderStatus> per_atom;
  std::optional<BValuedStructure> structure;
  /// Parameter i -> element index.
  std::vector<int> embedding;
};

/// Per-atom reduction: atom e needs a model of T with the formulas whose lower
/// bound contains e true and those whose upper bound misses e false. On
/// success the structure is the full product of the per-atom models and the
/// bounds are re-verified. Throws BadConstraint unless lower <= upper.
CompactnessResult compactness_check_and_synthesize(const ValueConstraint& vc, const Theory& theory,
                                                   int bound,
                                                   std::uint64_t budget = default_node_budget(),
                                                   Execution execution = Execution::kParallel);

/// The same condition quantified over every nonzero element instead of atoms.
FinderStatus compactness_condition_literal(const ValueConstraint& vc, const Theory& theory, int bound,
                                           std::uint64_t budget = default_node_budget());

struct Amalgam {
  FinderStatus status = FinderStatus::kUnknown;
  std::optional<BValuedStructure> structure;
  ElementMap into_from_first;
  ElementMap into_from_second;
  /// Largest rank <= the requested one at which both maps are elementary; -1
  /// if not even atomic values are preserved.
  int elementary_rank = -1;
};

/// Amalgamates M0 and M1 over M, given element maps M -> M0 and M -> M1 that
/// must be elementary at `rank` (NotElementary otherwise). A search that
/// finds nothing within the bound is reported as unknown: a larger bound may
/// succeed.
Amalgam amalgamate_bounded(const BValuedStructure& base, const BValuedStructure& first,
                           const BValuedStructure& second, const ElementMap& base_to_first,
                           const ElementMap& base_to_second, int rank, int bound,
                           const Theory& theory = {}, const CheckOptions& options = {},
                           std::uint64_t budget = default_node_budget());

}  // namespace bvm
