#include "bvm/distributions.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "bvm/error.hpp"

namespace bvm {

namespace {

Subset full_of(const Distribution& a) { return full_subset(a.index_size); }

void collect_params(const Term& t, std::set<int>& out) {
  if (t.kind() == Term::Kind::kParameter) out.insert(t.parameter_index());
  for (const Term& a : t.args()) collect_params(a, out);
}

void collect_params(const Formula& f, std::set<int>& out) {
  for (const Term& t : f.terms()) collect_params(t, out);
  for (const Formula& c : f.children()) collect_params(c, out);
}

void check_same_shape(const Distribution& a, const Distribution& b) {
  check_shape(a);
  check_shape(b);
  if (a.index_size != b.index_size || !(a.algebra == b.algebra)) {
    throw Error(ErrorKind::kIndexMismatch, "distributions over different index sets or algebras");
  }
}

Element singleton_meet(const Distribution& a, Subset s) {
  Element out = a.algebra.one();
  for (int i : subset_members(s)) out = out & a[Subset{1} << i];
  return out;
}

// Odometer over base^length, last position fastest; false after the last tuple.
bool next_tuple(std::vector<int>& tuple, int base) {
  for (std::size_t k = tuple.size(); k > 0; --k) {
    if (++tuple[k - 1] < base) return true;
    tuple[k - 1] = 0;
  }
  return false;
}

std::vector<int> identity(int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

Element type_value(const PartialType& type, const Formula& formula, std::span<const int> realizer) {
  Assignment a;
  for (std::size_t v = 0; v < type.variables.size(); ++v) a.variables.emplace_back(type.variables[v], realizer[v]);
  a.params = identity(type.host.size());
  return eval_bv(type.host, formula, a);
}

Truth truth_of(FinderStatus s) {
  switch (s) {
    case FinderStatus::kFound: return Truth::kTrue;
    case FinderStatus::kNone: return Truth::kFalse;
    case FinderStatus::kUnknown: return Truth::kUnknown;
  }
  return Truth::kUnknown;
}

// Both criteria are two-sided value constraints on the sentences
// ∃x̄⋀_{i∈t}φ_i(x̄, ȳ_i): lower bound A(t), upper bound A(t) for Łoś maps and
// A(t) ∨ ⋁_{i∈t}¬A({i}) for possibilities.
ValueConstraint criterion_constraint(const Distribution& a, const FormulaSequence& seq, bool possibility) {
  ValueConstraint vc;
  vc.algebra = a.algebra;
  vc.signature = seq.signature;
  vc.parameters = seq.param_count();
  for (Subset t = 0; t <= full_of(a); ++t) {
    vc.formulas.push_back(existential_conjunction(seq, t));
    vc.lower.push_back(a[t]);
    vc.upper.push_back(possibility ? a[t] | ~singleton_meet(a, t) : a[t]);
  }
  return vc;
}

void check_criterion_input(const Distribution& a, const FormulaSequence& seq) {
  check_shape(a);
  validate_sequence(seq);
  if (a.index_size != seq.index_size()) {
    throw Error(ErrorKind::kIndexMismatch, "distribution and formula sequence have different index sets");
  }
}

CriterionReport run_criterion(const Distribution& a, const FormulaSequence& seq, const CriterionOptions& options,
                              bool possibility) {
  check_criterion_input(a, seq);
  CriterionReport report;
  if (!is_distribution(a)) {
    report.verdict = Truth::kFalse;
    return report;
  }
  const ValueConstraint vc = criterion_constraint(a, seq, possibility);
  CompactnessResult r =
      compactness_check_and_synthesize(vc, options.theory, options.bound, options.budget, options.execution);
  report.verdict = truth_of(r.status);
  report.per_atom = r.per_atom;
  if (r.status != FinderStatus::kFound) return report;
  report.structure = std::move(r.structure);
  report.params = std::move(r.embedding);
  if (possibility) {
    Distribution los{a.algebra, a.index_size, {}};
    Assignment asg;
    asg.params = report.params;
    for (Subset t = 0; t <= full_of(a); ++t) los.values.push_back(eval_bv(*report.structure, vc.formulas[t], asg));
    if (!is_distribution(los) || !conservatively_refines(a, los)) {
      throw Error(ErrorKind::kPreconditionFailed, "possibility witness does not conservatively refine its Łoś map");
    }
    report.los_map = std::move(los);
  }
  return report;
}

Truth run_literal(const Distribution& a, const FormulaSequence& seq, const CriterionOptions& options,
                  bool possibility) {
  check_criterion_input(a, seq);
  if (!is_distribution(a)) return Truth::kFalse;
  const int params = seq.param_count();
  bool unknown = false;
  std::set<std::pair<Subset, std::vector<bool>>> seen;
  const auto elements = a.algebra.all_elements();
  for (Subset s = 0; s <= full_of(a); ++s) {
    const auto below = subsets_of(s);
    for (const Element& c : elements) {
      if (c.is_zero()) continue;
      bool applies = true;
      for (Subset t : below) applies = applies && decides(c, a[t]);
      if (possibility) {
        for (int i : subset_members(s)) applies = applies && leq(c, a[Subset{1} << i]);
      }
      if (!applies) continue;
      std::vector<bool> pattern;
      for (Subset t : below) pattern.push_back(leq(c, a[t]));
      if (!seen.emplace(s, pattern).second) continue;
      FinderTask task;
      task.signature = seq.signature;
      task.axioms = options.theory;
      task.params = params;
      task.bound = options.bound;
      task.node_budget = options.budget;
      for (std::size_t k = 0; k < below.size(); ++k) {
        (pattern[k] ? task.positive : task.negative).push_back(existential_conjunction(seq, below[k]));
      }
      const FinderStatus st = find_model(task).status;
      if (st == FinderStatus::kNone) return Truth::kFalse;
      unknown = unknown || st == FinderStatus::kUnknown;
    }
  }
  return unknown ? Truth::kUnknown : Truth::kTrue;
}

void check_in_filter(const Distribution& a, const PrincipalFilter& filter) {
  for (Subset s = 0; s <= full_of(a); ++s) {
    if (!filter.contains(a[s])) {
      throw Error(ErrorKind::kNotInFilter, "value at {" + subset_key(s) + "} is not in the filter");
    }
  }
}

}  // namespace

Distribution Distribution::constant(const BoolAlg& algebra, int index_size, const Element& value) {
  if (index_size < 0 || index_size > kMaxIndexSize) {
    throw Error(ErrorKind::kCapExceeded, "index set too large");
  }
  Distribution out{algebra, index_size, std::vector<Element>(std::size_t{1} << index_size, value)};
  out.values[0] = algebra.one();
  return out;
}

Distribution Distribution::from_singletons(const BoolAlg& algebra, std::span<const Element> singletons) {
  Distribution out = constant(algebra, static_cast<int>(singletons.size()), algebra.one());
  for (Subset s = 1; s <= full_subset(out.index_size); ++s) {
    Element v = algebra.one();
    for (int i : subset_members(s)) v = v & singletons[static_cast<std::size_t>(i)];
    out.values[s] = v;
  }
  return out;
}

void check_shape(const Distribution& a) {
  if (a.index_size < 0 || a.index_size > kMaxIndexSize ||
      a.values.size() != (std::size_t{1} << a.index_size)) {
    throw Error(ErrorKind::kIndexMismatch, "table does not cover every subset of the index set");
  }
  for (const Element& v : a.values) {
    if (v.atom_count() != a.algebra.atom_count()) {
      throw Error(ErrorKind::kIndexMismatch, "table value from another algebra");
    }
  }
}

bool is_distribution(const Distribution& a) {
  check_shape(a);
  if (!a[0].is_one()) return false;
  for (Subset s = 1; s <= full_of(a); ++s) {
    if (a[s].is_zero()) return false;
    for (int i : subset_members(s)) {
      if (!leq(a[s], a[s & ~(Subset{1} << i)])) return false;
    }
  }
  return true;
}

bool is_multiplicative(const Distribution& a) {
  check_shape(a);
  for (Subset s = 0; s <= full_of(a); ++s) {
    if (a[s] != singleton_meet(a, s)) return false;
  }
  return true;
}

bool refines(const Distribution& b, const Distribution& a) {
  check_same_shape(a, b);
  for (Subset s = 0; s <= full_of(a); ++s) {
    if (!leq(b[s], a[s])) return false;
  }
  return true;
}

bool conservatively_refines(const Distribution& b, const Distribution& a) {
  check_same_shape(a, b);
  for (Subset s = 0; s <= full_of(a); ++s) {
    if (b[s] != (a[s] & singleton_meet(b, s))) return false;
  }
  return true;
}

bool is_in_filter(const Distribution& a, const PrincipalFilter& filter) {
  check_shape(a);
  if (filter.atom_count() != a.algebra.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "filter on another algebra");
  return std::all_of(a.values.begin(), a.values.end(), [&](const Element& v) { return filter.contains(v); });
}

bool is_multiplicative_refinement(const Distribution& b, const Distribution& a, const PrincipalFilter& filter) {
  return is_multiplicative(b) && refines(b, a) && is_in_filter(b, filter);
}

int FormulaSequence::param_count() const {
  int best = -1;
  for (const Formula& f : formulas) best = std::max(best, max_parameter(f));
  return best + 1;
}

void validate_sequence(const FormulaSequence& seq) {
  if (seq.index_size() > kMaxIndexSize) throw Error(ErrorKind::kCapExceeded, "formula sequence too long");
  const std::set<std::string> vars(seq.variables.begin(), seq.variables.end());
  std::map<int, int> owner;
  for (int i = 0; i < seq.index_size(); ++i) {
    const Formula& f = seq.formulas[static_cast<std::size_t>(i)];
    check_symbols(f, seq.signature);
    for (const std::string& v : free_vars(f)) {
      if (!vars.count(v)) throw Error(ErrorKind::kUnboundVariable, "free variable '" + v + "' is not among x̄");
    }
    std::set<int> params;
    collect_params(f, params);
    for (int p : params) {
      const auto [it, fresh] = owner.emplace(p, i);
      if (!fresh && it->second != i) {
        throw Error(ErrorKind::kPreconditionFailed, "formulas " + std::to_string(it->second) + " and " +
                                                        std::to_string(i) + " share parameter #" + std::to_string(p));
      }
    }
  }
}

Formula existential_conjunction(const FormulaSequence& seq, Subset t) {
  std::vector<Formula> parts;
  for (int i : subset_members(t)) parts.push_back(seq.formulas.at(static_cast<std::size_t>(i)));
  return exists_all(seq.variables, conjunction_of(parts));
}

Distribution los_map_of_type(const PartialType& type) {
  const int m = static_cast<int>(type.formulas.size());
  Distribution out = Distribution::constant(type.host.algebra(), m, type.host.algebra().one());
  for (Subset s = 0; s <= full_subset(m); ++s) {
    std::vector<Formula> parts;
    for (int i : subset_members(s)) parts.push_back(type.formulas[static_cast<std::size_t>(i)]);
    Assignment a;
    a.params = identity(type.host.size());
    const Element v = eval_bv(type.host, exists_all(type.variables, conjunction_of(parts)), a);
    if (v.is_zero()) {
      throw Error(ErrorKind::kEmptyJoin, "||∃x̄ ⋀Γ|| = 0 for Γ = {" + subset_key(s) + "}: not a partial type");
    }
    out.values[s] = v;
  }
  return out;
}

std::string_view truth_name(Truth t) {
  switch (t) {
    case Truth::kFalse: return "false";
    case Truth::kTrue: return "true";
    case Truth::kUnknown: return "unknown";
  }
  return "unknown";
}

CriterionReport los_map_criterion(const Distribution& a, const FormulaSequence& seq, const CriterionOptions& options) {
  return run_criterion(a, seq, options, false);
}

CriterionReport possibility_criterion(const Distribution& a, const FormulaSequence& seq,
                                      const CriterionOptions& options) {
  return run_criterion(a, seq, options, true);
}

Truth los_map_criterion_literal(const Distribution& a, const FormulaSequence& seq, const CriterionOptions& options) {
  return run_literal(a, seq, options, false);
}

Truth possibility_criterion_literal(const Distribution& a, const FormulaSequence& seq,
                                    const CriterionOptions& options) {
  return run_literal(a, seq, options, true);
}

std::optional<Distribution> find_multiplicative_refinement(const Distribution& a, const PrincipalFilter& filter,
                                                           RefinementSearch search) {
  check_shape(a);
  if (filter.atom_count() != a.algebra.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "filter on another algebra");
  check_in_filter(a, filter);
  const Distribution constant = Distribution::constant(a.algebra, a.index_size, a[full_of(a)]);
  const bool constant_ok = is_multiplicative_refinement(constant, a, filter);
  if (is_multiplicative(a) && (search == RefinementSearch::kFirst || a != constant)) return a;
  if (search == RefinementSearch::kFirst && constant_ok) return constant;

  // Singleton values b_i ∈ F with b_i <= A({i}); B(s) = ⋀ b_i must stay below A(s).
  std::vector<std::vector<Element>> choices(static_cast<std::size_t>(a.index_size));
  const auto members = filter.members();
  for (int i = 0; i < a.index_size; ++i) {
    for (const Element& v : members) {
      if (leq(v, a[Subset{1} << i])) choices[static_cast<std::size_t>(i)].push_back(v);
    }
    if (choices[static_cast<std::size_t>(i)].empty()) return std::nullopt;
  }
  std::vector<std::size_t> pick(choices.size(), 0);
  std::vector<Element> singles(choices.size());
  while (true) {
    for (std::size_t i = 0; i < pick.size(); ++i) singles[i] = choices[i][pick[i]];
    Distribution b = Distribution::from_singletons(a.algebra, singles);
    if ((search == RefinementSearch::kFirst || b != constant) && refines(b, a)) return b;
    std::size_t k = pick.size();
    while (k > 0) {
      --k;
      if (++pick[k] < choices[k].size()) break;
      pick[k] = 0;
      if (k == 0) return std::nullopt;
    }
    if (pick.empty()) return std::nullopt;
  }
}

Distribution transfer_refinement_conservative(const Distribution& a, const Distribution& conservative,
                                              const Distribution& refinement, const PrincipalFilter& filter) {
  check_same_shape(a, conservative);
  check_same_shape(a, refinement);
  if (!conservatively_refines(conservative, a)) {
    throw Error(ErrorKind::kPreconditionFailed, "second table is not a conservative refinement of the first");
  }
  if (!is_multiplicative_refinement(refinement, a, filter)) {
    throw Error(ErrorKind::kPreconditionFailed, "third table is not a multiplicative refinement in the filter");
  }
  if (!is_in_filter(conservative, filter)) {
    throw Error(ErrorKind::kPreconditionFailed, "conservative refinement is not in the filter");
  }
  Distribution out = refinement;
  for (Subset s = 0; s <= full_of(a); ++s) out[s] = refinement[s] & singleton_meet(conservative, s);
  if (!is_multiplicative_refinement(out, conservative, filter)) {
    throw Error(ErrorKind::kPreconditionFailed, "transferred table fails its postconditions");
  }
  return out;
}

Distribution realization_to_mult_refinement(const PartialType& type, std::span<const int> realizer,
                                            const PrincipalFilter& ultrafilter) {
  if (realizer.size() != type.variables.size()) {
    throw Error(ErrorKind::kPreconditionFailed, "realizer needs one element per variable");
  }
  for (std::size_t i = 0; i < type.formulas.size(); ++i) {
    if (!ultrafilter.contains(type_value(type, type.formulas[i], realizer))) {
      throw Error(ErrorKind::kNotRealized, "formula " + to_string(type.formulas[i]) + " is not in the ultrafilter");
    }
  }
  const int m = static_cast<int>(type.formulas.size());
  Distribution out = Distribution::constant(type.host.algebra(), m, type.host.algebra().one());
  for (Subset s = 1; s <= full_subset(m); ++s) {
    std::vector<Formula> parts;
    for (int i : subset_members(s)) parts.push_back(type.formulas[static_cast<std::size_t>(i)]);
    out[s] = type_value(type, conjunction_of(parts), realizer);
  }
  if (!is_multiplicative_refinement(out, los_map_of_type(type), ultrafilter)) {
    throw Error(ErrorKind::kPreconditionFailed, "realizer table is not a multiplicative refinement");
  }
  return out;
}

Realization realize_from_mult_refinement(const PartialType& type, const Distribution& refinement,
                                         const PrincipalFilter& ultrafilter) {
  if (!type.host.is_bundle()) throw Error(ErrorKind::kPreconditionFailed, "host must be a bundle");
  check_shape(refinement);
  if (refinement.index_size != static_cast<int>(type.formulas.size()) || !is_multiplicative(refinement) ||
      !is_in_filter(refinement, ultrafilter)) {
    throw Error(ErrorKind::kPreconditionFailed, "table is not multiplicative in U over the type's formulas");
  }
  const BundleData& bundle = type.host.bundle();
  const int atoms = type.host.algebra().atom_count();
  const auto arity = type.variables.size();
  Realization out;
  // The atoms form the deciding antichain; fiber e must realize
  // Γ_e = {φ_i : e <= B({i})}. For a multiplicative B this fails somewhere
  // exactly when B does not refine the type's Łoś map.
  for (int e = 0; e < atoms; ++e) {
    const Structure& fiber = bundle.fibers[static_cast<std::size_t>(e)];
    Assignment a;
    for (const auto& element : bundle.elements) a.params.push_back(element[static_cast<std::size_t>(e)]);
    std::vector<const Formula*> gamma;
    for (std::size_t i = 0; i < type.formulas.size(); ++i) {
      if (refinement[Subset{1} << i].contains_atom(e)) gamma.push_back(&type.formulas[i]);
    }
    std::vector<int> tuple(arity, 0);
    bool found = false;
    do {
      a.variables.clear();
      for (std::size_t v = 0; v < arity; ++v) a.variables.emplace_back(type.variables[v], tuple[v]);
      found = std::all_of(gamma.begin(), gamma.end(), [&](const Formula* f) { return eval_ordinary(fiber, *f, a); });
    } while (!found && next_tuple(tuple, fiber.size()));
    if (!found) {
      throw Error(ErrorKind::kFiberWitnessMissing, "fiber " + std::to_string(e) + " does not realize its subtype");
    }
    out.fiber_values.push_back(tuple);
  }
  std::map<std::vector<int>, int> index;
  for (std::size_t k = 0; k < bundle.elements.size(); ++k) index.emplace(bundle.elements[k], static_cast<int>(k));
  for (std::size_t v = 0; v < arity; ++v) {
    std::vector<int> glued;
    for (int e = 0; e < atoms; ++e) glued.push_back(out.fiber_values[static_cast<std::size_t>(e)][v]);
    const auto it = index.find(glued);
    if (it == index.end()) {
      throw Error(ErrorKind::kPreconditionFailed, "glued witness is not an element of the host");
    }
    out.elements.push_back(it->second);
  }
  for (std::size_t i = 0; i < type.formulas.size(); ++i) {
    const Element v = type_value(type, type.formulas[i], out.elements);
    if (!leq(refinement[Subset{1} << i], v) || !ultrafilter.contains(v)) {
      throw Error(ErrorKind::kPreconditionFailed, "glued element does not realize the type");
    }
  }
  return out;
}

void for_each_distribution_in(const PrincipalFilter& filter, int index_size, std::size_t cap,
                              const std::function<void(const Distribution&)>& visit) {
  const BoolAlg algebra(filter.atom_count());
  Distribution a = Distribution::constant(algebra, index_size, algebra.one());
  const auto members = filter.members();
  const Subset full = full_subset(index_size);
  std::size_t count = 0;
  // Subsets are filled in increasing mask order, so every s \ {i} is set first.
  std::function<void(Subset)> fill = [&](Subset s) {
    if (s > full) {
      if (++count > cap) throw Error(ErrorKind::kCapExceeded, "more than " + std::to_string(cap) + " distributions");
      visit(a);
      return;
    }
    for (const Element& v : members) {
      bool fits = true;
      for (int i : subset_members(s)) fits = fits && leq(v, a[s & ~(Subset{1} << i)]);
      if (!fits) continue;
      a[s] = v;
      fill(s + 1);
    }
  };
  fill(1);
}

GoodnessReport is_good(const PrincipalFilter& filter, int index_size, std::size_t cap) {
  GoodnessReport report;
  for_each_distribution_in(filter, index_size, cap, [&](const Distribution& a) {
    ++report.distributions;
    const auto w = find_multiplicative_refinement(a, filter);
    if (w && is_multiplicative_refinement(*w, a, filter)) {
      report.witnesses.push_back(*w);
    } else if (report.good) {
      report.good = false;
      report.counterexample = a;
    }
  });
  return report;
}

std::vector<std::vector<int>> goodness_witness_sets(int s_size, std::span<const Subset> family) {
  if (s_size < 0 || s_size > kMaxIndexSize) throw Error(ErrorKind::kCapExceeded, "index set too large");
  const Subset full = full_subset(s_size);
  const std::set<Subset> j(family.begin(), family.end());
  for (Subset t : j) {
    if (!is_subset(t, full)) throw Error(ErrorKind::kNotDownwardClosed, "{" + subset_key(t) + "} is not inside s");
    for (int i : subset_members(t)) {
      if (!j.count(t & ~(Subset{1} << i))) {
        throw Error(ErrorKind::kNotDownwardClosed, "{" + subset_key(t) + "} is in J but a subset is not");
      }
    }
  }
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(s_size));
  int token = 0;
  for (Subset t : j) {
    for (int i : subset_members(t)) sets[static_cast<std::size_t>(i)].push_back(token);
    ++token;
  }
  for (Subset t = 1; t <= full; ++t) {
    std::vector<int> common = sets[static_cast<std::size_t>(subset_members(t).front())];
    for (int i : subset_members(t)) {
      std::vector<int> next;
      const auto& other = sets[static_cast<std::size_t>(i)];
      std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(next));
      common = std::move(next);
    }
    if (common.empty() == static_cast<bool>(j.count(t))) {
      throw Error(ErrorKind::kPreconditionFailed, "witness sets miss the pattern at {" + subset_key(t) + "}");
    }
  }
  return sets;
}

SaturationReport saturates(const PrincipalFilter& ultrafilter, const FormulaSequence& seq,
                           const CriterionOptions& options, std::size_t cap) {
  (void)ultrafilter.ultrafilter_atom();
  validate_sequence(seq);
  SaturationReport report;
  for_each_distribution_in(ultrafilter, seq.index_size(), cap, [&](const Distribution& a) {
    ++report.candidates;
    SaturationEntry entry{a, los_map_criterion(a, seq, options).verdict,
                          possibility_criterion(a, seq, options).verdict, std::nullopt};
    if (entry.los_map == Truth::kFalse && entry.possibility == Truth::kFalse) return;
    report.unknown = report.unknown || entry.los_map == Truth::kUnknown || entry.possibility == Truth::kUnknown;
    entry.refinement = find_multiplicative_refinement(a, ultrafilter);
    if (!entry.refinement || !is_multiplicative_refinement(*entry.refinement, a, ultrafilter)) {
      report.saturates = false;
    }
    report.entries.push_back(std::move(entry));
  });
  if (report.unknown) report.saturates = false;
  return report;
}

}  // namespace bvm
