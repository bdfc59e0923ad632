#include "bvm/boolean_algebra.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <string>

#include "bvm/error.hpp"

namespace bvm {

namespace {

AtomMask mask_for(int atom_count) {
  return atom_count >= 64 ? ~AtomMask{0} : (AtomMask{1} << atom_count) - 1;
}

void require_same(const Element& a, const Element& b) {
  if (a.atom_count() != b.atom_count()) {
    throw Error(ErrorKind::kMixedAlgebras,
                "elements of P(" + std::to_string(a.atom_count()) + ") and P(" +
                    std::to_string(b.atom_count()) + ")");
  }
}

}  // namespace

int default_atom_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("BVM_ATOM_CAP")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v >= 1 && v <= kMaxAtoms) return static_cast<int>(v);
    }
    return 16;
  }();
  return cap;
}

BoolAlg::BoolAlg(int atom_count, std::vector<std::string> labels)
    : atom_count_(atom_count), labels_(std::move(labels)) {
  if (atom_count < 1 || atom_count > kMaxAtoms) {
    throw Error(ErrorKind::kSizeOverflow,
                "atom count must lie in 1.." + std::to_string(kMaxAtoms) + ", got " +
                    std::to_string(atom_count));
  }
  if (!labels_.empty() && static_cast<int>(labels_.size()) != atom_count) {
    throw Error(ErrorKind::kIndexMismatch, "label count differs from atom count");
  }
}

AtomMask BoolAlg::full_mask() const noexcept { return mask_for(atom_count_); }

Element BoolAlg::zero() const { return Element(atom_count_, 0); }
Element BoolAlg::one() const { return Element(atom_count_, full_mask()); }

Element BoolAlg::atom(int index) const {
  if (index < 0 || index >= atom_count_) {
    throw Error(ErrorKind::kInvalidTuple, "atom " + std::to_string(index) + " out of range");
  }
  return Element(atom_count_, AtomMask{1} << index);
}

Element BoolAlg::element(AtomMask mask) const { return Element(atom_count_, mask); }

Element BoolAlg::element(std::initializer_list<int> atoms) const {
  return element(std::span<const int>(atoms.begin(), atoms.size()));
}

Element BoolAlg::element(std::span<const int> atoms) const {
  AtomMask mask = 0;
  for (int a : atoms) mask |= this->atom(a).mask();
  return Element(atom_count_, mask);
}

std::vector<Element> BoolAlg::all_elements() const {
  if (atom_count_ > 20) {
    throw Error(ErrorKind::kCapExceeded, "refusing to list 2^" + std::to_string(atom_count_) +
                                             " elements");
  }
  std::vector<Element> out;
  out.reserve(std::size_t{1} << atom_count_);
  for (AtomMask m = 0; m <= full_mask(); ++m) out.emplace_back(atom_count_, m);
  return out;
}

Element::Element(int atom_count, AtomMask mask) : atom_count_(atom_count), mask_(mask) {
  if (atom_count < 1 || atom_count > kMaxAtoms) {
    throw Error(ErrorKind::kSizeOverflow, "bad atom count " + std::to_string(atom_count));
  }
  if ((mask & ~mask_for(atom_count)) != 0) {
    throw Error(ErrorKind::kInvalidTuple, "mask has atoms outside P(" +
                                              std::to_string(atom_count) + ")");
  }
}

bool Element::is_one() const noexcept { return mask_ == mask_for(atom_count_); }
bool Element::is_atom() const noexcept { return std::has_single_bit(mask_); }
int Element::popcount() const noexcept { return std::popcount(mask_); }
int Element::first_atom() const noexcept {
  return mask_ == 0 ? -1 : std::countr_zero(mask_);
}

std::vector<int> Element::atoms() const {
  std::vector<int> out;
  for (AtomMask m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

Element meet(const Element& a, const Element& b) {
  require_same(a, b);
  return Element(a.atom_count(), a.mask() & b.mask());
}

Element join(const Element& a, const Element& b) {
  require_same(a, b);
  return Element(a.atom_count(), a.mask() | b.mask());
}

Element complement(const Element& a) {
  return Element(a.atom_count(), ~a.mask() & mask_for(a.atom_count()));
}

Element symmetric_difference(const Element& a, const Element& b) {
  require_same(a, b);
  return Element(a.atom_count(), a.mask() ^ b.mask());
}

bool leq(const Element& a, const Element& b) {
  require_same(a, b);
  return (a.mask() & ~b.mask()) == 0;
}

Element big_meet(const BoolAlg& algebra, std::span<const Element> elements) {
  Element out = algebra.one();
  for (const Element& e : elements) out = meet(out, e);
  return out;
}

Element big_join(const BoolAlg& algebra, std::span<const Element> elements) {
  Element out = algebra.zero();
  for (const Element& e : elements) out = join(out, e);
  return out;
}

bool decides(const Element& c, const Element& b) {
  if (c.is_zero()) throw Error(ErrorKind::kZeroElement, "only nonzero elements decide");
  return leq(c, b) || leq(c, complement(b));
}

AntichainStatus antichain_checks(std::span<const Element> members) {
  AntichainStatus status;
  if (members.empty()) return status.is_antichain = true, status;
  AtomMask seen = 0;
  const int n = members.front().atom_count();
  for (const Element& m : members) {
    if (m.atom_count() != n) {
      throw Error(ErrorKind::kMixedAlgebras, "antichain members from different algebras");
    }
    if (m.is_zero() || (seen & m.mask()) != 0) return status;
    seen |= m.mask();
  }
  status.is_antichain = true;
  status.is_maximal = seen == mask_for(n);
  return status;
}

int chain_condition(const BoolAlg& algebra) { return algebra.atom_count() + 1; }

bool independent_family_check(std::span<const std::vector<Element>> family) {
  if (family.empty()) return true;
  const int n = family.front().empty() ? 1 : family.front().front().atom_count();
  for (const auto& antichain : family) {
    if (!antichain_checks(antichain).is_maximal) {
      throw Error(ErrorKind::kNotMaximal, "family member is not a maximal antichain");
    }
  }
  // Meets only shrink as the subfamily grows, so total choice functions are
  // the binding ones. Odometer over choices in lexicographic order.
  std::vector<std::size_t> choice(family.size(), 0);
  while (true) {
    AtomMask meet_mask = mask_for(n);
    for (std::size_t i = 0; i < family.size(); ++i) meet_mask &= family[i][choice[i]].mask();
    if (meet_mask == 0) return false;
    std::size_t k = family.size();
    while (k > 0) {
      --k;
      if (++choice[k] < family[k].size()) break;
      choice[k] = 0;
      if (k == 0) return true;
    }
  }
}

IndependentFamily make_independent_family(int count, int size, int atom_cap) {
  if (count < 0 || size < 1) {
    throw Error(ErrorKind::kPreconditionFailed, "need count >= 0 and size >= 1");
  }
  long long atoms = 1;
  for (int i = 0; i < count; ++i) {
    atoms *= size;
    if (atoms > atom_cap) {
      throw Error(ErrorKind::kSizeOverflow, std::to_string(size) + "^" + std::to_string(count) +
                                                " exceeds the atom cap " +
                                                std::to_string(atom_cap));
    }
  }
  BoolAlg algebra(static_cast<int>(atoms));
  IndependentFamily out{algebra, {}};
  long long stride = 1;
  for (int i = 0; i < count; ++i, stride *= size) {
    std::vector<AtomMask> blocks(static_cast<std::size_t>(size), 0);
    for (long long a = 0; a < atoms; ++a) {
      blocks[static_cast<std::size_t>((a / stride) % size)] |= AtomMask{1} << a;
    }
    std::vector<Element> antichain;
    for (AtomMask b : blocks) antichain.push_back(algebra.element(b));
    out.antichains.push_back(std::move(antichain));
  }
  return out;
}

PrincipalFilter::PrincipalFilter(Element generator) : generator_(generator) {
  if (generator_.is_zero()) throw Error(ErrorKind::kNoFIP, "filter generator is 0");
}

PrincipalFilter PrincipalFilter::from_generators(const BoolAlg& algebra,
                                                 std::span<const Element> generators) {
  Element d = big_meet(algebra, generators);
  if (d.is_zero()) throw Error(ErrorKind::kNoFIP, "generators have zero meet");
  return PrincipalFilter(d);
}

PrincipalFilter PrincipalFilter::ultrafilter(const BoolAlg& algebra, int atom) {
  return PrincipalFilter(algebra.atom(atom));
}

PrincipalFilter PrincipalFilter::trivial(const BoolAlg& algebra) {
  return PrincipalFilter(algebra.one());
}

bool PrincipalFilter::contains(const Element& a) const { return leq(generator_, a); }

int PrincipalFilter::ultrafilter_atom() const {
  if (!is_ultrafilter()) throw Error(ErrorKind::kNotUltrafilter, "filter is not generated by an atom");
  return generator_.first_atom();
}

std::vector<Element> PrincipalFilter::members() const {
  const int n = generator_.atom_count();
  if (n > 20) throw Error(ErrorKind::kCapExceeded, "filter too large to list");
  // Members are d ∨ x for x ranging over subsets of ¬d.
  const AtomMask free = ~generator_.mask() & mask_for(n);
  std::vector<Element> out;
  AtomMask sub = 0;
  while (true) {
    out.emplace_back(n, generator_.mask() | sub);
    if (sub == free) break;
    sub = (sub - free) & free;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Quotient::Quotient(const PrincipalFilter& filter)
    : source_(filter.atom_count()),
      target_(filter.generator().popcount()),
      generator_(filter.generator()),
      atom_map_(static_cast<std::size_t>(filter.atom_count()), -1) {
  int next = 0;
  for (int a : generator_.atoms()) {
    atom_map_[static_cast<std::size_t>(a)] = next++;
    inverse_.push_back(a);
  }
}

Element Quotient::project(const Element& a) const {
  const Element restricted = meet(a, generator_);
  AtomMask out = 0;
  for (int atom : restricted.atoms()) {
    out |= AtomMask{1} << atom_map_[static_cast<std::size_t>(atom)];
  }
  return target_.element(out);
}

Element Quotient::lift(const Element& q) const {
  if (q.atom_count() != target_.atom_count()) {
    throw Error(ErrorKind::kMixedAlgebras, "element is not in the quotient algebra");
  }
  AtomMask out = 0;
  for (int atom : q.atoms()) out |= AtomMask{1} << inverse_[static_cast<std::size_t>(atom)];
  return source_.element(out);
}

bool Quotient::equal_mod(const Element& a, const Element& b) const {
  return leq(generator_, complement(symmetric_difference(a, b)));
}

bool Quotient::leq_mod(const Element& a, const Element& b) const {
  return equal_mod(meet(a, b), a);
}

bool Quotient::nonzero_mod(const Element& a) const {
  return !equal_mod(a, source_.zero());
}

bool Quotient::holds_mod(const std::function<bool(std::span<const Element>)>& predicate,
                         std::span<const Element> args) const {
  std::vector<Element> projected;
  projected.reserve(args.size());
  for (const Element& a : args) projected.push_back(project(a));
  return predicate(projected);
}

RegularSequenceReport regular_sequence_report(std::span<const Element> members, int degree) {
  RegularSequenceReport report;
  report.degree = degree;
  const int count = static_cast<int>(members.size());
  if (count > kMaxIndexSize) throw Error(ErrorKind::kCapExceeded, "sequence too long");
  const int n = count == 0 ? 1 : members.front().atom_count();
  const AtomMask one = mask_for(n);

  // fip_up_to: scan subfamilies by size.
  std::vector<AtomMask> meets(std::size_t{1} << count, one);
  std::vector<bool> size_ok(static_cast<std::size_t>(count) + 1, true);
  for (Subset s = 1; s < (Subset{1} << count); ++s) {
    const int low = std::countr_zero(s);
    meets[s] = meets[s & (s - 1)] & members[static_cast<std::size_t>(low)].mask();
    if (meets[s] == 0) size_ok[static_cast<std::size_t>(subset_size(s))] = false;
  }
  report.fip_up_to = 0;
  for (int m = 1; m <= count && size_ok[static_cast<std::size_t>(m)]; ++m) report.fip_up_to = m;

  // A deciding element c lies below a member iff each atom under c does, so
  // the count for c never exceeds the count of any atom below it.
  report.degree_bound_holds = true;
  for (int atom = 0; atom < n; ++atom) {
    int below = 0;
    for (const Element& a : members) below += a.contains_atom(atom) ? 1 : 0;
    if (below > degree) report.degree_bound_holds = false;
  }

  // Density: every nonzero b has a nonzero element below it deciding every
  // member. The least atom of b is the candidate.
  report.deciding_dense = true;
  if (n <= 16) {
    for (AtomMask b = 1; b <= one && report.deciding_dense; ++b) {
      const Element c(n, AtomMask{1} << std::countr_zero(b));
      for (const Element& a : members) {
        if (!decides(c, a)) {
          report.deciding_dense = false;
          break;
        }
      }
    }
  } else {
    for (int atom = 0; atom < n && report.deciding_dense; ++atom) {
      const Element c(n, AtomMask{1} << atom);
      for (const Element& a : members) report.deciding_dense = report.deciding_dense && decides(c, a);
    }
  }
  return report;
}

RegularSequence regular_sequence_from_antichain(const IndexedAntichain& antichain, int degree) {
  const int size = antichain.index_size;
  if (degree < 1) throw Error(ErrorKind::kBadIndexing, "degree must be at least 1");
  if (size < 0 || size > kMaxIndexSize) throw Error(ErrorKind::kBadIndexing, "index size out of range");
  for (Subset s = 0; s < (Subset{1} << size); ++s) {
    const bool wanted = subset_size(s) >= 1 && subset_size(s) <= degree;
    const bool present = antichain.members.count(s) != 0;
    if (wanted != present && s != 0) {
      throw Error(ErrorKind::kBadIndexing,
                  "index set {" + subset_key(s) + (present ? "} not allowed" : "} missing"));
    }
  }
  for (const auto& [s, element] : antichain.members) {
    if (!is_subset(s, full_subset(size))) {
      throw Error(ErrorKind::kBadIndexing, "index set outside the index range");
    }
  }
  std::vector<Element> members_list;
  for (const auto& [s, element] : antichain.members) members_list.push_back(element);
  if (members_list.empty()) throw Error(ErrorKind::kBadIndexing, "empty antichain");
  if (!antichain_checks(members_list).is_antichain) {
    throw Error(ErrorKind::kNotAntichain, "members overlap or vanish");
  }
  const BoolAlg algebra(members_list.front().atom_count());
  RegularSequence out;
  for (int i = 0; i < size; ++i) {
    Element a = algebra.zero();
    for (const auto& [s, element] : antichain.members) {
      if (subset_contains(s, i)) a = join(a, element);
    }
    out.members.push_back(a);
  }
  out.report = regular_sequence_report(out.members, degree);
  return out;
}

}  // namespace bvm
