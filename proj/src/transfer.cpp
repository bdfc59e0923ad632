#include "bvm/transfer.hpp"

#include <set>

#include "bvm/error.hpp"

namespace bvm {

AlgebraHom::AlgebraHom(BoolAlg source, BoolAlg target, std::vector<int> atom_map)
    : source_(std::move(source)), target_(std::move(target)), atom_map_(std::move(atom_map)) {
  if (static_cast<int>(atom_map_.size()) != target_.atom_count()) {
    throw Error(ErrorKind::kInvalidTuple, "atom map needs one source atom per target atom");
  }
  for (int x : atom_map_) {
    if (x < 0 || x >= source_.atom_count()) {
      throw Error(ErrorKind::kInvalidTuple, "atom map value " + std::to_string(x) + " is not a source atom");
    }
  }
}

Element AlgebraHom::operator()(const Element& a) const {
  if (a.atom_count() != source_.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "element outside the source");
  AtomMask out = 0;
  for (std::size_t y = 0; y < atom_map_.size(); ++y) {
    if (a.contains_atom(atom_map_[y])) out |= AtomMask{1} << y;
  }
  return target_.element(out);
}

Element AlgebraHom::minimal_preimage(const Element& b) const {
  if (b.atom_count() != target_.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "element outside the target");
  AtomMask out = 0;
  for (int y : b.atoms()) out |= AtomMask{1} << atom_map_[static_cast<std::size_t>(y)];
  return source_.element(out);
}

Element AlgebraHom::range() const { return minimal_preimage(target_.one()); }

PrincipalFilter AlgebraHom::kernel() const { return PrincipalFilter(range()); }

bool AlgebraHom::is_surjective() const {
  return std::set<int>(atom_map_.begin(), atom_map_.end()).size() == atom_map_.size();
}

AlgebraHom hom_from_atom_map(const BoolAlg& source, const BoolAlg& target, std::vector<int> atom_map,
                             bool surjective) {
  AlgebraHom j(source, target, std::move(atom_map));
  if (surjective && !j.is_surjective()) {
    throw Error(ErrorKind::kNotInjective, "two target atoms map to the same source atom");
  }
  return j;
}

PrincipalFilter preimage_filter(const AlgebraHom& j, const PrincipalFilter& filter) {
  if (filter.atom_count() != j.target().atom_count()) throw Error(ErrorKind::kMixedAlgebras, "filter off the target");
  return PrincipalFilter(j.minimal_preimage(filter.generator()));
}

namespace {

void require_surjective(const AlgebraHom& j) {
  if (!j.is_surjective()) throw Error(ErrorKind::kNotSurjective, "homomorphism is not onto");
}

void require_distribution(const Distribution& a, const char* what) {
  if (!is_distribution(a)) throw Error(ErrorKind::kPreconditionFailed, std::string(what) + " is not a distribution");
}

void require_over(const Distribution& a, const BoolAlg& algebra, const char* what) {
  check_shape(a);
  if (!(a.algebra == algebra)) throw Error(ErrorKind::kMixedAlgebras, std::string(what) + " lives in another algebra");
}

Distribution map_table(const Distribution& a, const BoolAlg& algebra, const std::function<Element(const Element&)>& f) {
  Distribution out{algebra, a.index_size, {}};
  out.values.reserve(a.values.size());
  for (const Element& v : a.values) out.values.push_back(f(v));
  return out;
}

}  // namespace

Distribution pushforward(const AlgebraHom& j, const Distribution& a0) {
  require_over(a0, j.source(), "pushed distribution");
  require_distribution(a0, "pushed table");
  Distribution out = map_table(a0, j.target(), [&](const Element& v) { return j(v); });
  for (Subset s = 0; s < out.values.size(); ++s) {
    if (out[s].is_zero()) throw Error(ErrorKind::kZeroImage, "j sends the value at {" + subset_key(s) + "} to 0");
  }
  require_distribution(out, "pushforward");
  return out;
}

Distribution pullback_distribution(const AlgebraHom& j, const Distribution& a1) {
  require_surjective(j);
  require_over(a1, j.target(), "pulled distribution");
  return pullback_distribution(j, a1, map_table(a1, j.source(), [&](const Element& v) { return j.minimal_preimage(v); }));
}

Distribution pullback_distribution(const AlgebraHom& j, const Distribution& a1, const Distribution& preimage) {
  require_surjective(j);
  require_over(a1, j.target(), "pulled distribution");
  require_over(preimage, j.source(), "preimage table");
  require_distribution(a1, "pulled table");
  if (preimage.index_size != a1.index_size) throw Error(ErrorKind::kIndexMismatch, "preimage over another index set");
  Distribution lift = preimage;
  lift[0] = j.source().one();
  for (Subset s = 0; s < lift.values.size(); ++s) {
    if (j(lift[s]) != a1[s]) {
      throw Error(ErrorKind::kPreconditionFailed, "preimage table misses at {" + subset_key(s) + "}");
    }
  }
  // C(s) = ⋀_{t ⊆ t' ⊆ s} A'0(t) ∨ ¬A'0(t') measures where the lift is monotone;
  // it lies in the kernel because A1 is.
  Distribution c = Distribution::constant(j.source(), a1.index_size, j.source().one());
  for (Subset s = 1; s < c.values.size(); ++s) {
    Element v = j.source().one();
    for (Subset t2 : subsets_of(s)) {
      for (Subset t : subsets_of(t2)) v = v & (lift[t] | ~lift[t2]);
    }
    c[s] = v;
  }
  const auto d = find_multiplicative_refinement(c, j.kernel());
  if (!d) throw Error(ErrorKind::kPreconditionFailed, "kernel admits no multiplicative refinement of the fix-up");
  Distribution out = lift;
  for (Subset s = 0; s < out.values.size(); ++s) out[s] = lift[s] & (*d)[s];
  require_distribution(out, "pullback");
  if (pushforward(j, out) != a1) throw Error(ErrorKind::kPreconditionFailed, "pullback does not push forward to A1");
  return out;
}

Distribution pull_back_mult_refinement(const AlgebraHom& j, const Distribution& a0, const PrincipalFilter& u0,
                                       const Distribution& b1, const PrincipalFilter& u1) {
  require_surjective(j);
  require_over(a0, j.source(), "source distribution");
  require_over(b1, j.target(), "target refinement");
  if (!(preimage_filter(j, u1) == u0)) throw Error(ErrorKind::kPreconditionFailed, "U0 is not the preimage of U1");
  if (!is_in_filter(a0, u0)) throw Error(ErrorKind::kPreconditionFailed, "A0 is not in U0");
  const Distribution a1 = pushforward(j, a0);
  if (!is_multiplicative_refinement(b1, a1, u1)) {
    throw Error(ErrorKind::kPreconditionFailed, "B1 is not a multiplicative refinement of j∘A0 in U1");
  }
  std::vector<Element> singles;
  for (int i = 0; i < a0.index_size; ++i) singles.push_back(j.minimal_preimage(b1[Subset{1} << i]));
  const Distribution lift = Distribution::from_singletons(j.source(), singles);
  // C(s) = ⋀_{t ⊆ s} A0(t) ∨ ¬B'0(t) measures where the lift refines A0.
  Distribution c = Distribution::constant(j.source(), a0.index_size, j.source().one());
  for (Subset s = 1; s < c.values.size(); ++s) {
    Element v = j.source().one();
    for (Subset t : subsets_of(s)) v = v & (a0[t] | ~lift[t]);
    c[s] = v;
  }
  const auto d = find_multiplicative_refinement(c, j.kernel());
  if (!d) throw Error(ErrorKind::kPreconditionFailed, "kernel admits no multiplicative refinement of the fix-up");
  Distribution out = lift;
  for (Subset s = 0; s < out.values.size(); ++s) out[s] = lift[s] & (*d)[s];
  if (!is_multiplicative_refinement(out, a0, u0)) {
    throw Error(ErrorKind::kPreconditionFailed, "lifted table fails its postconditions");
  }
  return out;
}

LosTransferReport los_transfer_check(const AlgebraHom& j, const Distribution& a0, const FormulaSequence& seq,
                                     const CriterionOptions& options) {
  require_surjective(j);
  LosTransferReport report;
  const Distribution a1 = pushforward(j, a0);
  const CriterionReport src = los_map_criterion(a0, seq, options);
  const CriterionReport dst = los_map_criterion(a1, seq, options);
  report.source = src.verdict;
  report.target = dst.verdict;
  report.decided = report.source != Truth::kUnknown && report.target != Truth::kUnknown;
  report.agree = report.decided && report.source == report.target;

  const Subset full = full_subset(a0.index_size);
  for (std::size_t y = 0; y < dst.per_atom.size() && !report.source_counterexample; ++y) {
    if (dst.per_atom[y] != FinderStatus::kNone) continue;
    Element c0 = j.source().one();
    for (Subset t = 0; t <= full; ++t) {
      c0 = c0 & (a1[t].contains_atom(static_cast<int>(y)) ? a0[t] : ~a0[t]);
    }
    report.source_counterexample = c0;
  }
  bool inside_failure = false;
  bool outside_failure = false;
  const Element range = j.range();
  for (std::size_t x = 0; x < src.per_atom.size(); ++x) {
    if (src.per_atom[x] != FinderStatus::kNone) continue;
    if (range.contains_atom(static_cast<int>(x))) {
      inside_failure = true;
      if (!report.target_counterexample) report.target_counterexample = j(j.source().atom(static_cast<int>(x)));
    } else {
      outside_failure = true;
    }
  }
  report.transfer_defect = outside_failure && !inside_failure && report.target == Truth::kTrue;
  return report;
}

void validate_state(const GoodPairState& state) {
  if (state.designated.size() != state.designated_image.size()) {
    throw Error(ErrorKind::kPreconditionFailed, "designated elements and images must pair up");
  }
  if (static_cast<int>(state.designated.size()) > kMaxDesignated) {
    throw Error(ErrorKind::kPreconditionFailed, "too many designated pairs");
  }
  for (const Element& c : state.designated) {
    if (c.atom_count() != state.source.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "c_α off the source");
  }
  for (const Element& c : state.designated_image) {
    if (c.atom_count() != state.target.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "c′_α off the target");
  }
  if (state.filter.atom_count() != state.source.atom_count()) {
    throw Error(ErrorKind::kMixedAlgebras, "filter off the source");
  }
  for (const auto& antichain : state.reserve) {
    for (const Element& c : antichain) {
      if (c.atom_count() != state.source.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "reserve off the source");
    }
    if (!antichain_checks(antichain).is_maximal) {
      throw Error(ErrorKind::kNotMaximal, "reserve member is not a maximal antichain");
    }
  }
}

Element eval_sigma(SigmaTerm sigma, std::span<const Element> values, const BoolAlg& algebra) {
  const std::size_t minterms = std::size_t{1} << values.size();
  Element out = algebra.zero();
  for (std::size_t m = 0; m < minterms; ++m) {
    if (((sigma >> m) & 1U) == 0) continue;
    Element v = algebra.one();
    for (std::size_t a = 0; a < values.size(); ++a) v = v & (((m >> a) & 1U) ? values[a] : ~values[a]);
    out = out | v;
  }
  return out;
}

namespace {

std::size_t minterm_count(const GoodPairState& state) { return std::size_t{1} << state.designated.size(); }

// Minterms whose value at c̄′ is nonzero: the least member of Σ1 and the
// minimal members of Σ+.
std::vector<SigmaTerm> live_minterms(const GoodPairState& state) {
  std::vector<SigmaTerm> out;
  for (std::size_t m = 0; m < minterm_count(state); ++m) {
    const SigmaTerm single = SigmaTerm{1} << m;
    if (!eval_sigma(single, state.designated_image, state.target).is_zero()) out.push_back(single);
  }
  return out;
}

bool nonzero_mod(const Element& a, const PrincipalFilter& filter) { return !(a & filter.generator()).is_zero(); }

std::vector<SigmaTerm> all_terms(const GoodPairState& state) {
  if (state.designated.size() > 4) throw Error(ErrorKind::kCapExceeded, "Σ listing needs at most 4 designated pairs");
  const std::size_t count = std::size_t{1} << minterm_count(state);
  std::vector<SigmaTerm> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<SigmaTerm>(i);
  return out;
}

}  // namespace

std::vector<SigmaTerm> sigma_one(const GoodPairState& state) {
  validate_state(state);
  std::vector<SigmaTerm> out;
  for (SigmaTerm s : all_terms(state)) {
    if (eval_sigma(s, state.designated_image, state.target).is_one()) out.push_back(s);
  }
  return out;
}

std::vector<SigmaTerm> sigma_plus(const GoodPairState& state) {
  validate_state(state);
  std::vector<SigmaTerm> out;
  for (SigmaTerm s : all_terms(state)) {
    if (!eval_sigma(s, state.designated_image, state.target).is_zero()) out.push_back(s);
  }
  return out;
}

Element choice_meet(const GoodPairState& state, const Choice& f) {
  Element out = state.source.one();
  for (const auto& [antichain, member] : f) {
    out = out & state.reserve.at(static_cast<std::size_t>(antichain)).at(static_cast<std::size_t>(member));
  }
  return out;
}

bool is_pregood(const GoodPairState& state, Execution execution) {
  validate_state(state);
  const std::vector<SigmaTerm> live = live_minterms(state);
  // Σ1 is closed upward and σ(c̄) is monotone in σ: its least member decides.
  SigmaTerm least = 0;
  for (SigmaTerm m : live) least |= m;
  if (!state.filter.contains(eval_sigma(least, state.designated, state.source))) return false;

  // x_f shrinks as f grows and σ(c̄) shrinks with σ: total choice functions and
  // single live minterms suffice.
  std::vector<Element> minterm_values;
  for (SigmaTerm m : live) minterm_values.push_back(eval_sigma(m, state.designated, state.source));
  std::size_t total = 1;
  for (const auto& antichain : state.reserve) total *= antichain.size();
  const std::size_t bad = find_first_index(total, execution, [&](std::size_t code) {
    Element x = state.source.one();
    for (const auto& antichain : state.reserve) {
      x = x & antichain[code % antichain.size()];
      code /= antichain.size();
    }
    for (const Element& v : minterm_values) {
      if (!nonzero_mod(x & v, state.filter)) return true;
    }
    return false;
  });
  return bad == total;
}

bool is_pregood_literal(const GoodPairState& state) {
  for (SigmaTerm s : sigma_one(state)) {
    if (!state.filter.contains(eval_sigma(s, state.designated, state.source))) return false;
  }
  const std::vector<SigmaTerm> plus = sigma_plus(state);
  // Partial choice functions: each antichain contributes nothing or one member.
  std::vector<std::size_t> pick(state.reserve.size(), 0);
  while (true) {
    Choice f;
    for (std::size_t k = 0; k < pick.size(); ++k) {
      if (pick[k] > 0) f.emplace_back(static_cast<int>(k), static_cast<int>(pick[k] - 1));
    }
    const Element x = choice_meet(state, f);
    for (SigmaTerm s : plus) {
      if (!nonzero_mod(x & eval_sigma(s, state.designated, state.source), state.filter)) return false;
    }
    std::size_t k = 0;
    for (; k < pick.size(); ++k) {
      if (++pick[k] <= state.reserve[k].size()) break;
      pick[k] = 0;
    }
    if (k == pick.size()) return true;
  }
}

GoodPairState extend_to_good(const GoodPairState& state, Execution execution) {
  if (!is_pregood(state, execution)) throw Error(ErrorKind::kNotPregood, "state is not a pre-good pair");
  // Removing atoms only makes condition 1 easier and condition 2 harder, so an
  // atom that cannot go now can never go later: one pass reaches a maximum.
  GoodPairState out = state;
  for (int atom : state.filter.generator().atoms()) {
    GoodPairState trial = out;
    const Element smaller = out.filter.generator() & ~out.source.atom(atom);
    if (smaller.is_zero()) continue;
    trial.filter = PrincipalFilter(smaller);
    if (is_pregood(trial, execution)) out = std::move(trial);
  }
  return out;
}

std::optional<GoodPairWitness> find_witness(const GoodPairState& state, const Element& a) {
  validate_state(state);
  if (!nonzero_mod(a, state.filter)) return std::nullopt;
  const std::size_t n = state.reserve.size();
  // Domains by size, then lexicographically; members lexicographically.
  for (std::size_t size = 0; size <= n; ++size) {
    for (Subset dom = 0; dom <= full_subset(static_cast<int>(n)); ++dom) {
      if (static_cast<std::size_t>(subset_size(dom)) != size) continue;
      const std::vector<int> antichains = subset_members(dom);
      std::vector<std::size_t> pick(antichains.size(), 0);
      while (true) {
        Choice f;
        for (std::size_t k = 0; k < antichains.size(); ++k) f.emplace_back(antichains[k], static_cast<int>(pick[k]));
        const Element x = choice_meet(state, f);
        for (std::size_t alpha = 0; alpha < state.designated.size(); ++alpha) {
          if (state.designated_image[alpha].is_zero()) continue;
          if (!nonzero_mod(x & state.designated[alpha] & ~a, state.filter)) {
            return GoodPairWitness{f, static_cast<int>(alpha)};
          }
        }
        // Lexicographic odometer, last position fastest.
        bool advanced = false;
        for (std::size_t k = antichains.size(); k-- > 0;) {
          if (++pick[k] < state.reserve[static_cast<std::size_t>(antichains[k])].size()) {
            advanced = true;
            break;
          }
          pick[k] = 0;
        }
        if (!advanced) break;
      }
    }
  }
  return std::nullopt;
}

RefinementStep refinement_step(const PrincipalFilter& filter, const IndexedAntichain& antichain,
                               const Distribution& a) {
  check_shape(a);
  if (antichain.index_size != a.index_size) {
    throw Error(ErrorKind::kBadIndexing, "antichain and distribution use different index sets");
  }
  const Subset full = full_subset(a.index_size);
  std::vector<Element> d(static_cast<std::size_t>(full) + 1);
  for (const auto& [s, e] : antichain.members) {
    if (!is_subset(s, full)) throw Error(ErrorKind::kBadIndexing, "antichain key {" + subset_key(s) + "} leaves I");
    if (e.atom_count() != a.algebra.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "antichain off the algebra");
    d[s] = e;
  }
  if (antichain.members.size() != d.size()) {
    throw Error(ErrorKind::kBadIndexing, "antichain must be keyed by every subset of I");
  }
  if (!antichain_checks(d).is_antichain) throw Error(ErrorKind::kNotAntichain, "antichain members overlap or vanish");
  if (filter.atom_count() != a.algebra.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "filter off the algebra");
  if (!is_in_filter(a, filter)) throw Error(ErrorKind::kNotInFilter, "distribution leaves the filter");

  Distribution b = Distribution::constant(a.algebra, a.index_size, a.algebra.one());
  for (Subset s = 1; s <= full; ++s) {
    Element v = a.algebra.zero();
    for (Subset t = s; t <= full; ++t) {
      if (is_subset(s, t)) v = v | (a[t] & d[t]);
    }
    b[s] = v;
  }
  // B decreases, so E ∪ range(B) has the FIP iff E meets B(I).
  const Element top = filter.generator() & b[full];
  if (top.is_zero()) {
    throw Error(ErrorKind::kNoFIP, "E's generator and B({" + subset_key(full) + "}) = A(I) ∧ d_I are disjoint");
  }
  if (!is_multiplicative(b)) throw Error(ErrorKind::kPreconditionFailed, "refinement is not multiplicative");
  for (Subset s = 1; s <= full; ++s) {
    if (!leq(b[s], a[s])) throw Error(ErrorKind::kPreconditionFailed, "refinement exceeds A");
  }
  return {std::move(b), PrincipalFilter(top)};
}

}  // namespace bvm
