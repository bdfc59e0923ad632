#pragma once

// Homomorphisms between finite algebras given by atom maps, transport of
// distributions along them, and the single-step good-pair operations.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bvm/boolean_algebra.hpp"
#include "bvm/distributions.hpp"
#include "bvm/parallel.hpp"

namespace bvm {

/// j: source -> target with j(a) = {y : g(y) ∈ a}, g: target atoms -> source atoms.
class AlgebraHom {
 public:
  AlgebraHom(BoolAlg source, BoolAlg target, std::vector<int> atom_map);

  const BoolAlg& source() const noexcept { return source_; }
  const BoolAlg& target() const noexcept { return target_; }
  const std::vector<int>& atom_map() const noexcept { return atom_map_; }

  Element operator()(const Element& a) const;
  /// Least a with j(a) = b; defined when j is surjective.
  Element minimal_preimage(const Element& b) const;
  /// Join of g's range.
  Element range() const;
  /// j⁻¹(1): generated by the range.
  PrincipalFilter kernel() const;
  bool is_surjective() const;

 private:
  BoolAlg source_;
  BoolAlg target_;
  std::vector<int> atom_map_;
};

/// Throws InvalidTuple if g is not total into the source atoms, and
/// NotInjective if `surjective` is requested and g collides.
AlgebraHom hom_from_atom_map(const BoolAlg& source, const BoolAlg& target, std::vector<int> atom_map,
                             bool surjective = true);

/// j⁻¹(F) for a filter F on the target.
PrincipalFilter preimage_filter(const AlgebraHom& j, const PrincipalFilter& filter);

/// s ↦ j(A0(s)). Throws ZeroImage, PreconditionFailed if A0 is not a distribution.
Distribution pushforward(const AlgebraHom& j, const Distribution& a0);

/// A0 with j∘A0 = A1, built from the minimal preimages and the kernel fix-up.
/// Throws NotSurjective.
Distribution pullback_distribution(const AlgebraHom& j, const Distribution& a1);
/// Same, from a caller-chosen preimage table (value 1 forced at ∅); it must
/// satisfy j∘preimage = A1 (PreconditionFailed otherwise).
Distribution pullback_distribution(const AlgebraHom& j, const Distribution& a1, const Distribution& preimage);

/// Lifts a multiplicative refinement B1 of j∘A0 in U1 to one of A0 in
/// U0 = j⁻¹(U1), tweaked by a multiplicative refinement in the kernel.
/// Throws PreconditionFailed when U0 is not j⁻¹(U1) or B1 is not such a
/// refinement, NotSurjective.
Distribution pull_back_mult_refinement(const AlgebraHom& j, const Distribution& a0, const PrincipalFilter& u0,
                                       const Distribution& b1, const PrincipalFilter& u1);

struct LosTransferReport {
  Truth source = Truth::kUnknown;
  Truth target = Truth::kUnknown;
  bool decided = false;
  bool agree = false;
  /// Source fails only at atoms outside g's range, which j sends to 0: the
  /// target cannot see them, so the backward transfer fails there.
  bool transfer_defect = false;
  /// Failing target atom mapped back through c0 = ⋀_{t∈J} A0(t) ∧ ⋀_{t∉J} ¬A0(t).
  std::optional<Element> source_counterexample;
  /// Failing source atom (inside the range) mapped forward through j.
  std::optional<Element> target_counterexample;
};

/// Evaluates the Łoś-map criterion on A0 and on j∘A0 independently.
LosTransferReport los_transfer_check(const AlgebraHom& j, const Distribution& a0, const FormulaSequence& seq,
                                     const CriterionOptions& options = {});

/// A Boolean term in k designated variables as its set of minterms: bit m is
/// the minterm with x_α positive exactly for α ∈ m.
using SigmaTerm = std::uint64_t;
inline constexpr int kMaxDesignated = 6;

struct GoodPairState {
  BoolAlg source{1};
  BoolAlg target{1};
  /// c_α ∈ source and c′_α ∈ target, paired by index.
  std::vector<Element> designated;
  std::vector<Element> designated_image;
  /// Maximal antichains of the source.
  std::vector<std::vector<Element>> reserve;
  PrincipalFilter filter{Element(1, 1)};
};

/// Throws PreconditionFailed on mismatched shapes or more than kMaxDesignated
/// pairs, NotMaximal for a reserve member that is not a maximal antichain.
void validate_state(const GoodPairState& state);

Element eval_sigma(SigmaTerm sigma, std::span<const Element> values, const BoolAlg& algebra);
/// Σ1 and Σ+ listed exhaustively; requires at most 4 designated pairs.
std::vector<SigmaTerm> sigma_one(const GoodPairState& state);
std::vector<SigmaTerm> sigma_plus(const GoodPairState& state);

/// A partial choice function on the reserve: (antichain index, member index).
using Choice = std::vector<std::pair<int, int>>;
Element choice_meet(const GoodPairState& state, const Choice& f);

/// Every σ ∈ Σ1 has σ(c̄) ∈ E, and x_f ∧ σ(c̄) is nonzero mod E for every
/// choice function f and σ ∈ Σ+.
bool is_pregood(const GoodPairState& state, Execution execution = Execution::kParallel);
/// The definition checked term by term and over partial choice functions.
bool is_pregood_literal(const GoodPairState& state);

/// Shrinks E's generator atom by atom while the pair stays pre-good; the
/// result admits no proper pre-good extension. Throws NotPregood.
GoodPairState extend_to_good(const GoodPairState& state, Execution execution = Execution::kParallel);

struct GoodPairWitness {
  Choice choice;
  int designated = -1;
};

/// f ∈ P_C and α with c′_α ≠ 0 and x_f ∧ c_α <= a mod E; choices are tried
/// by domain size, then lexicographically. None when a = 0 mod E.
std::optional<GoodPairWitness> find_witness(const GoodPairState& state, const Element& a);

struct RefinementStep {
  Distribution refinement;
  PrincipalFilter filter;
};

/// B(∅) = 1 and B(s) = ⋁{A(t) ∧ d_t : s ⊆ t} otherwise, with the filter
/// generated by E and the values of B. Throws BadIndexing unless the
/// antichain is keyed by every subset of I, NotAntichain, NotInFilter when A
/// leaves E, and NoFIP when E and B(I) are disjoint.
RefinementStep refinement_step(const PrincipalFilter& filter, const IndexedAntichain& antichain,
                               const Distribution& a);

}  // namespace bvm
