#pragma once

// Distributions over a finite index set I = {0..m-1}: tables s ↦ A(s) over
// every subset of I. The Łoś-map and possibility criteria are posed as
// two-sided value constraints and decided per atom by the model finder.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bvm/boolean_algebra.hpp"
#include "bvm/bvalued.hpp"
#include "bvm/subsets.hpp"

namespace bvm {

struct Distribution {
  BoolAlg algebra{1};
  int index_size = 0;
  /// values[s] for every subset bitmask s of {0..index_size-1}.
  std::vector<Element> values;

  const Element& operator[](Subset s) const { return values.at(s); }
  Element& operator[](Subset s) { return values.at(s); }

  /// value at every nonempty s, 1 at ∅.
  static Distribution constant(const BoolAlg& algebra, int index_size, const Element& value);
  /// s ↦ meet of the singleton values.
  static Distribution from_singletons(const BoolAlg& algebra, std::span<const Element> singletons);

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Throws IndexMismatch unless the table covers P(I) with elements of the algebra.
void check_shape(const Distribution& a);
/// Value 1 at ∅, monotone decreasing, nonzero everywhere.
bool is_distribution(const Distribution& a);
bool is_multiplicative(const Distribution& a);
/// b(s) <= a(s) for every s. Throws IndexMismatch on different I or algebra.
bool refines(const Distribution& b, const Distribution& a);
/// b(s) = a(s) ∧ ⋀_{i∈s} b({i}) for every s.
bool conservatively_refines(const Distribution& b, const Distribution& a);
bool is_in_filter(const Distribution& a, const PrincipalFilter& filter);
/// Multiplicative, refines `a`, in the filter.
bool is_multiplicative_refinement(const Distribution& b, const Distribution& a, const PrincipalFilter& filter);

/// (φ_i(x̄, ȳ_i) : i ∈ I). Free variables come from `variables`; the ȳ_i are
/// parameters, and distinct formulas must use disjoint parameter sets.
struct FormulaSequence {
  Signature signature;
  std::vector<std::string> variables;
  std::vector<Formula> formulas;

  int index_size() const { return static_cast<int>(formulas.size()); }
  /// One more than the largest parameter index used.
  int param_count() const;
};

/// Throws PreconditionFailed on shared parameters, UnboundVariable on a free
/// variable outside x̄, CapExceeded past kMaxIndexSize formulas.
void validate_sequence(const FormulaSequence& seq);
/// ∃x̄ ⋀_{i∈t} φ_i.
Formula existential_conjunction(const FormulaSequence& seq, Subset t);

/// p(x̄) over a host; #k in a formula denotes element k of the host.
struct PartialType {
  BValuedStructure host;
  std::vector<std::string> variables;
  std::vector<Formula> formulas;
};

/// Γ ↦ ||∃x̄ ⋀Γ|| over all subsets Γ of p. Throws EmptyJoin when some value
/// is 0, i.e. p is not a partial type.
Distribution los_map_of_type(const PartialType& type);

enum class Truth { kFalse, kTrue, kUnknown };
std::string_view truth_name(Truth t);

struct CriterionOptions {
  Theory theory;
  int bound = 3;
  std::uint64_t budget = default_node_budget();
  Execution execution = Execution::kParallel;
};

struct CriterionReport {
  Truth verdict = Truth::kUnknown;
  std::vector<FinderStatus> per_atom;
  /// When true: a bundle of models of T and elements for the parameters
  /// (parameter k ↦ element params[k]).
  std::optional<BValuedStructure> structure;
  std::vector<int> params;
  /// For possibilities: the Łoś map realized by the witness, which the
  /// distribution conservatively refines.
  std::optional<Distribution> los_map;
};

/// A is a (I, T, φ̄)-Łoś map realized by models of size <= bound: for each
/// atom c some model of T and parameters make ∃x̄⋀_{i∈t}φ_i true exactly
/// for the t with c <= A(t). "No model within the bound" reads as false.
CriterionReport los_map_criterion(const Distribution& a, const FormulaSequence& seq,
                                  const CriterionOptions& options = {});
/// Atom c only constrains the t inside Δ_c = {i : c <= A({i})}.
CriterionReport possibility_criterion(const Distribution& a, const FormulaSequence& seq,
                                      const CriterionOptions& options = {});

/// The criteria quantified literally: every s ⊆ I and every nonzero c that
/// decides A(t) for all t ⊆ s (and, for possibilities, lies below every
/// A({i}), i ∈ s). Requires at most 20 atoms.
Truth los_map_criterion_literal(const Distribution& a, const FormulaSequence& seq,
                                const CriterionOptions& options = {});
Truth possibility_criterion_literal(const Distribution& a, const FormulaSequence& seq,
                                    const CriterionOptions& options = {});

enum class RefinementSearch { kFirst, kNonConstant };

/// Tries A itself, then the constant table A(I). kNonConstant asks for a
/// witness other than that constant table, found by exhaustive search over
/// singleton values in the filter (increasing masks, index 0 slowest). Throws
/// NotInFilter unless A lies in the filter.
std::optional<Distribution> find_multiplicative_refinement(const Distribution& a, const PrincipalFilter& filter,
                                                           RefinementSearch search = RefinementSearch::kFirst);

/// C′(s) = C(s) ∧ ⋀_{i∈s} Bc({i}): a multiplicative refinement of the
/// conservative refinement Bc, in the filter. Throws PreconditionFailed.
Distribution transfer_refinement_conservative(const Distribution& a, const Distribution& conservative,
                                              const Distribution& refinement, const PrincipalFilter& filter);

/// Γ ↦ ||⋀Γ(b̄)||, b̄ host elements for x̄. Throws NotRealized unless every
/// ||φ(b̄)|| lies in the ultrafilter.
Distribution realization_to_mult_refinement(const PartialType& type, std::span<const int> realizer,
                                            const PrincipalFilter& ultrafilter);

struct Realization {
  /// Host element per variable of x̄.
  std::vector<int> elements;
  /// fiber_values[e][v]: value of variable v in fiber e.
  std::vector<std::vector<int>> fiber_values;
};

/// Per atom c, realizes Γ_c = {φ_i : c <= B({i})} inside fiber c and glues
/// the fiber witnesses into host elements. B must be multiplicative and in U
/// (PreconditionFailed); a fiber without a witness, i.e. B not refining the
/// type's Łoś map, raises FiberWitnessMissing. PreconditionFailed also when
/// the host is not a bundle or the glued tuple is not one of its elements.
Realization realize_from_mult_refinement(const PartialType& type, const Distribution& refinement,
                                         const PrincipalFilter& ultrafilter);

/// Visits every distribution over I with values in the filter (value 1 at
/// ∅, monotone), in lexicographic order of the table read by increasing
/// subset mask. Throws CapExceeded after `cap` tables.
void for_each_distribution_in(const PrincipalFilter& filter, int index_size, std::size_t cap,
                              const std::function<void(const Distribution&)>& visit);

inline constexpr std::size_t kDistributionCap = 1'000'000;

struct GoodnessReport {
  bool good = true;
  std::size_t distributions = 0;
  /// Parallel to the enumeration order.
  std::vector<Distribution> witnesses;
  /// First distribution without a verified witness.
  std::optional<Distribution> counterexample;
};

/// Every distribution in the filter has a multiplicative refinement in it.
/// On finite algebras this always holds (constant-table witness).
GoodnessReport is_good(const PrincipalFilter& filter, int index_size, std::size_t cap = kDistributionCap);

/// Tokens n_t, one per t ∈ J in increasing mask order; a_i = {n_t : i ∈ t ∈ J}.
/// Throws NotDownwardClosed if J is not closed under subsets of s or leaves s.
/// The empty family is accepted.
std::vector<std::vector<int>> goodness_witness_sets(int s_size, std::span<const Subset> family);

struct SaturationEntry {
  Distribution distribution;
  Truth los_map = Truth::kUnknown;
  Truth possibility = Truth::kUnknown;
  std::optional<Distribution> refinement;
};

struct SaturationReport {
  /// Every Łoś map and possibility found has a multiplicative refinement,
  /// and no criterion was left unknown.
  bool saturates = true;
  bool unknown = false;
  std::size_t candidates = 0;
  /// Only candidates that are a Łoś map or a possibility (or unknown).
  std::vector<SaturationEntry> entries;
};

SaturationReport saturates(const PrincipalFilter& ultrafilter, const FormulaSequence& seq,
                           const CriterionOptions& options = {}, std::size_t cap = kDistributionCap);

}  // namespace bvm
