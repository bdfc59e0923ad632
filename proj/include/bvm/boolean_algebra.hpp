#pragma once

// Finite Boolean algebras, represented as the powerset of their atoms.
//
// An Element is an atom set stored as a 64-bit mask together with the atom
// count of the algebra it belongs to. Two algebras are the same algebra iff
// they have the same atom count; labels are presentation only.

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bvm/subsets.hpp"

namespace bvm {

using AtomMask = std::uint64_t;

inline constexpr int kMaxAtoms = 64;

/// Default atom cap for exhaustive searches. Reads BVM_ATOM_CAP once; 16 when
/// unset or malformed.
int default_atom_cap();

class Element;

class BoolAlg {
 public:
  explicit BoolAlg(int atom_count, std::vector<std::string> labels = {});

  int atom_count() const noexcept { return atom_count_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  AtomMask full_mask() const noexcept;

  Element zero() const;
  Element one() const;
  Element atom(int index) const;
  Element element(AtomMask mask) const;
  Element element(std::initializer_list<int> atoms) const;
  Element element(std::span<const int> atoms) const;

  /// All 2^n elements in increasing mask order. Requires n <= 20.
  std::vector<Element> all_elements() const;

  friend bool operator==(const BoolAlg& a, const BoolAlg& b) {
    return a.atom_count_ == b.atom_count_;
  }

 private:
  int atom_count_;
  std::vector<std::string> labels_;
};

class Element {
 public:
  Element() = default;
  Element(int atom_count, AtomMask mask);

  int atom_count() const noexcept { return atom_count_; }
  AtomMask mask() const noexcept { return mask_; }
  BoolAlg algebra() const { return BoolAlg(atom_count_); }

  bool is_zero() const noexcept { return mask_ == 0; }
  bool is_one() const noexcept;
  bool is_atom() const noexcept;
  bool contains_atom(int atom) const noexcept { return ((mask_ >> atom) & 1U) != 0; }
  int popcount() const noexcept;
  /// Index of the least atom below this element; -1 for zero.
  int first_atom() const noexcept;
  std::vector<int> atoms() const;

  friend bool operator==(const Element&, const Element&) = default;
  friend auto operator<=>(const Element&, const Element&) = default;

 private:
  int atom_count_ = 1;
  AtomMask mask_ = 0;
};

/// Meet, join, complement, order. All throw MixedAlgebras when the operands
/// come from different algebras.
Element meet(const Element& a, const Element& b);
Element join(const Element& a, const Element& b);
Element complement(const Element& a);
Element symmetric_difference(const Element& a, const Element& b);
bool leq(const Element& a, const Element& b);
/// big_meet(∅) = 1, big_join(∅) = 0.
Element big_meet(const BoolAlg& algebra, std::span<const Element> elements);
Element big_join(const BoolAlg& algebra, std::span<const Element> elements);

inline Element operator&(const Element& a, const Element& b) { return meet(a, b); }
inline Element operator|(const Element& a, const Element& b) { return join(a, b); }
inline Element operator~(const Element& a) { return complement(a); }

/// c decides b iff c <= b or c <= ¬b. Throws ZeroElement for c = 0.
bool decides(const Element& c, const Element& b);

struct AntichainStatus {
  bool is_antichain = false;
  bool is_maximal = false;
};

AntichainStatus antichain_checks(std::span<const Element> members);

/// Least λ such that the algebra has no antichain of size λ: n+1 on P(n).
int chain_condition(const BoolAlg& algebra);

/// True iff every choice function over the family has a nonzero meet. Throws
/// NotMaximal if a member is not a maximal antichain.
bool independent_family_check(std::span<const std::vector<Element>> family);

struct IndependentFamily {
  BoolAlg algebra;
  std::vector<std::vector<Element>> antichains;
};

/// P(d^m); atom a encodes the function i ↦ (a / d^i) mod d and antichain i
/// groups atoms by their i-th coordinate. Throws SizeOverflow past atom_cap.
IndependentFamily make_independent_family(int count, int size,
                                          int atom_cap = default_atom_cap());

class PrincipalFilter {
 public:
  explicit PrincipalFilter(Element generator);

  static PrincipalFilter from_generators(const BoolAlg& algebra,
                                         std::span<const Element> generators);
  static PrincipalFilter ultrafilter(const BoolAlg& algebra, int atom);
  static PrincipalFilter trivial(const BoolAlg& algebra);

  const Element& generator() const noexcept { return generator_; }
  int atom_count() const noexcept { return generator_.atom_count(); }
  bool contains(const Element& a) const;
  bool is_ultrafilter() const noexcept { return generator_.is_atom(); }
  /// The atom generating an ultrafilter; throws NotUltrafilter otherwise.
  int ultrafilter_atom() const;

  /// Elements of the filter in increasing mask order. Requires n <= 20.
  std::vector<Element> members() const;

  friend bool operator==(const PrincipalFilter&, const PrincipalFilter&) = default;

 private:
  Element generator_;
};

/// Quotient of an algebra by a principal filter generated by d. The quotient
/// algebra has one atom per atom below d, numbered in increasing order.
class Quotient {
 public:
  explicit Quotient(const PrincipalFilter& filter);

  const BoolAlg& source() const noexcept { return source_; }
  const BoolAlg& target() const noexcept { return target_; }
  const Element& generator() const noexcept { return generator_; }
  /// Source atom -> quotient atom, or -1 when the atom is not below d.
  int quotient_atom(int source_atom) const { return atom_map_.at(source_atom); }

  /// a ↦ a ∧ d, renumbered into the quotient algebra.
  Element project(const Element& a) const;
  /// Least source element projecting onto `q`.
  Element lift(const Element& q) const;

  /// a =_D b iff ¬(a △ b) lies in the filter.
  bool equal_mod(const Element& a, const Element& b) const;
  bool leq_mod(const Element& a, const Element& b) const;
  bool nonzero_mod(const Element& a) const;

  /// Evaluates a lattice predicate on the projections of `args`.
  bool holds_mod(const std::function<bool(std::span<const Element>)>& predicate,
                 std::span<const Element> args) const;

 private:
  BoolAlg source_;
  BoolAlg target_;
  Element generator_;
  std::vector<int> atom_map_;
  std::vector<int> inverse_;
};

/// Antichain members keyed by subsets of an index set {0..index_size-1}.
struct IndexedAntichain {
  int index_size = 0;
  std::map<Subset, Element> members;
};

struct RegularSequenceReport {
  int degree = 0;
  /// Largest m (capped at the sequence length) such that all meets of at most
  /// m members are nonzero.
  int fip_up_to = 0;
  bool deciding_dense = false;
  /// No nonzero deciding element lies below more than `degree` members.
  bool degree_bound_holds = false;
};

struct RegularSequence {
  std::vector<Element> members;
  RegularSequenceReport report;
};

/// a_i = join of c_s over the index sets s containing i. The antichain must be
/// keyed by exactly the index sets of size 1..degree (the empty set is
/// optional); throws BadIndexing otherwise and NotAntichain when members
/// overlap or vanish.
RegularSequence regular_sequence_from_antichain(const IndexedAntichain& antichain,
                                                int degree);

/// Report for an arbitrary sequence, checked directly.
RegularSequenceReport regular_sequence_report(std::span<const Element> members,
                                              int degree);

}  // namespace bvm
