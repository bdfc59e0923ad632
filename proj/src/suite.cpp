#include "bvm/suite.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "bvm/bvalued.hpp"
#include "bvm/distributions.hpp"
#include "bvm/error.hpp"
#include "bvm/generators.hpp"
#include "bvm/transfer.hpp"
#include "bvm/ultrapower.hpp"

namespace bvm::suite {

using io::Json;

std::string_view status_name(Status s) {
  switch (s) {
    case Status::kPass: return "pass";
    case Status::kFail: return "fail";
    case Status::kUnknown: return "unknown";
  }
  return "?";
}

int exit_code(Status status) {
  switch (status) {
    case Status::kPass: return 0;
    case Status::kFail: return 1;
    case Status::kUnknown: return 3;
  }
  return 1;
}

namespace {

constexpr CriterionInfo kCriteria[] = {
    {1, "dual-evaluation", "recursive and coordinatewise evaluation agree"},
    {2, "specialization", "values in U match truth in the specialization"},
    {3, "ultrapower", "M^B is full, pre-Łoś is elementary, M^B/U ≅ M"},
    {4, "compactness", "per-atom check equals synthesis, values within bounds"},
    {5, "realization", "realization to refinement and back"},
    {6, "goodness", "every filter is good with verified witnesses"},
    {7, "witness-sets", "witness sets meet exactly on the family"},
    {8, "refinement-step", "refinement step is multiplicative, refining, FIP-preserving"},
    {9, "separation", "pushforward and pullback across surjective homomorphisms"},
    {10, "criteria", "per-atom criteria equal their literal definitions"},
    {11, "regular-sequences", "degree-k regular sequences from antichains"},
    {12, "parser-determinism", "formulas reparse identically and reports are reproducible"},
};

Outcome pass(std::size_t checks) { return {Status::kPass, checks, ""}; }
Outcome fail(std::string detail, std::size_t checks = 0) { return {Status::kFail, checks, std::move(detail)}; }
Outcome unknown(std::string detail, std::size_t checks = 0) { return {Status::kUnknown, checks, std::move(detail)}; }

Rng criterion_rng(const Config& c, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

std::string params_text(std::span<const int> params) {
  std::string out = "[";
  for (std::size_t i = 0; i < params.size(); ++i) out += (i ? "," : "") + std::to_string(params[i]);
  return out + "]";
}

Theory linear_order_theory() {
  return {parse_formula("forall x. !(x < x)"), parse_formula("forall x, y, z. (x < y & y < z) -> x < z"),
          parse_formula("forall x, y. x < y | x = y | y < x")};
}

FormulaSequence interval_sequence() {
  return FormulaSequence{Signature({{"<", 2}}, {}, {}), {"x"}, {parse_formula("#0 < x"), parse_formula("x < #1")}};
}

// Small fixed (sequence, theory) pairs for the criterion checks.
std::vector<std::pair<FormulaSequence, Theory>> tiny_instances() {
  std::vector<std::pair<FormulaSequence, Theory>> out;
  out.emplace_back(FormulaSequence{Signature({}, {}, {}), {"x"}, {parse_formula("x = #0"), parse_formula("x = #1")}},
                   Theory{parse_formula("forall x, y. x = y")});
  out.emplace_back(interval_sequence(), linear_order_theory());
  const Signature p({{"P", 1}}, {}, {});
  out.emplace_back(FormulaSequence{p, {"x"}, {parse_formula("P(x)"), parse_formula("!P(x)")}}, Theory{});
  const Signature r({{"R", 2}}, {}, {});
  out.emplace_back(FormulaSequence{r, {"x"}, {parse_formula("R(#0, x)"), parse_formula("R(x, #1)")}},
                   Theory{parse_formula("forall x. !R(x, x)")});
  return out;
}

// Drops the first negation met in preorder.
Formula drop_first_negation(const Formula& f, bool& done) {
  if (done) return f;
  switch (f.kind()) {
    case Formula::Kind::kNot:
      done = true;
      return f.child(0);
    case Formula::Kind::kAnd: {
      Formula a = drop_first_negation(f.child(0), done);
      return Formula::conjunction(a, drop_first_negation(f.child(1), done));
    }
    case Formula::Kind::kOr: {
      Formula a = drop_first_negation(f.child(0), done);
      return Formula::disjunction(a, drop_first_negation(f.child(1), done));
    }
    case Formula::Kind::kImplies: {
      Formula a = drop_first_negation(f.child(0), done);
      return Formula::implication(a, drop_first_negation(f.child(1), done));
    }
    case Formula::Kind::kExists:
      return Formula::exists(f.name(), drop_first_negation(f.child(0), done));
    case Formula::Kind::kForall:
      return Formula::forall(f.name(), drop_first_negation(f.child(0), done));
    default:
      return f;
  }
}

void for_each_tuple(int size, int arity, const std::function<bool(std::span<const int>)>& visit) {
  std::vector<int> t(static_cast<std::size_t>(arity), 0);
  while (true) {
    if (!visit(t)) return;
    int k = arity - 1;
    for (; k >= 0; --k) {
      if (++t[static_cast<std::size_t>(k)] < size) break;
      t[static_cast<std::size_t>(k)] = 0;
    }
    if (k < 0) return;
  }
}

Signature small_signature() { return Signature({{"R", 2}}, {}, {"c"}); }

CheckOptions check_options(const Config& c, int params) {
  CheckOptions o;
  o.params = params;
  o.max_rank = c.rank;
  o.max_size = 4;
  o.execution = Execution::kSerial;
  return o;
}

// --- 1, 2: bundles over P(n), n <= 3 -------------------------------------

std::vector<Json> bundle_family(const Config& c, int id) {
  Rng g = criterion_rng(c, 1);  // criteria 1 and 2 share the family
  (void)id;
  std::vector<Json> out;
  for (int n = 1; n <= std::min(3, c.atoms); ++n) {
    for (int k = 0; k < 50; ++k) out.push_back(Json{{"structure", io::to_json(random_bundle(g, BoolAlg(n), small_signature(), 3, 5))}});
  }
  return out;
}

Outcome check_dual_evaluation(const Json& in, const Config& c) {
  const BValuedStructure m = io::bvstructure_from_json(in.at("structure"), "/structure");
  EnumerationCaps caps;
  caps.max_rank = c.rank;
  caps.max_size = 4;
  const auto formulas = enumerate_formulas(m.signature(), c.rank, {}, 2, caps);
  const BValuedStructure abstract = to_abstract(m);
  std::size_t checks = 0;
  std::optional<std::string> bad;
  for (const Formula& f : formulas) {
    bool mutated = false;
    const Formula recursive_side = c.mutant == "flip-complement" ? drop_first_negation(f, mutated) : f;
    for_each_tuple(m.size(), 2, [&](std::span<const int> p) {
      Assignment asg;
      asg.params.assign(p.begin(), p.end());
      const Element r = eval_bv(m, recursive_side, asg, Engine::kRecursive);
      const Element w = eval_bv(m, f, asg, Engine::kCoordinatewise);
      const Element t = eval_bv(abstract, f, asg, Engine::kRecursive);
      ++checks;
      if (r != w || t != w) {
        bad = "formula " + to_string(f) + " at params " + params_text(p) + ": recursive " +
              io::to_json(r).dump() + ", coordinatewise " + io::to_json(w).dump() + ", abstract " +
              io::to_json(t).dump();
        return false;
      }
      return true;
    });
    if (bad) return fail(*bad, checks);
  }
  return pass(checks);
}

Outcome check_specialization_family(const Json& in, const Config& c) {
  const BValuedStructure m = io::bvstructure_from_json(in.at("structure"), "/structure");
  std::size_t checks = 0;
  for (int e = 0; e < m.algebra().atom_count(); ++e) {
    const auto r = check_specialization(m, PrincipalFilter::ultrafilter(m.algebra(), e), c.rank, check_options(c, 2));
    checks += r.formulas_checked;
    if (!r.holds) {
      return fail("atom " + std::to_string(e) + ": " + to_string(r.counterexample->formula) + " at params " +
                      params_text(r.counterexample->params),
                  checks);
    }
  }
  return pass(checks);
}

// --- 3: Boolean ultrapowers ------------------------------------------------

std::vector<Json> ultrapower_instances(const Config& c) {
  Rng g = criterion_rng(c, 3);
  std::vector<Json> out;
  const Signature sig({{"R", 2}}, {}, {});
  for (int n = 1; n <= std::min(2, c.atoms); ++n) {
    for (int size = 1; size <= 3; ++size) {
      out.push_back(Json{{"base", io::to_json(linear_order(size))}, {"atoms", n}});
      for (int k = 0; k < 2; ++k) out.push_back(Json{{"base", io::to_json(random_structure(g, sig, size))}, {"atoms", n}});
    }
  }
  return out;
}

Outcome check_ultrapower(const Json& in, const Config& c) {
  const Structure base = io::structure_from_json(in.at("base"), "/base");
  const BoolAlg alg(in.at("atoms").get<int>());
  const auto up = boolean_ultrapower(base, alg);
  std::size_t checks = 0;
  const auto full = fullness_check(up.structure, c.rank, check_options(c, 1));
  checks += full.formulas_checked;
  if (!full.full) return fail("M^B not full at " + to_string(full.counterexample->formula), checks);
  ElementMap map;
  const auto embed = pre_los(up);
  for (int a = 0; a < base.size(); ++a) map.emplace_back(a, embed[static_cast<std::size_t>(a)]);
  const auto elem = check_elementary(map, diagonal(base, alg), up.structure, c.rank, check_options(c, 2));
  checks += elem.formulas_checked;
  if (!elem.elementary) return fail("pre-Łoś map not elementary at " + to_string(elem.counterexample->formula), checks);
  for (int e = 0; e < alg.atom_count(); ++e) {
    const auto los = los_check(base, alg, PrincipalFilter::ultrafilter(alg, e), c.rank, check_options(c, 2));
    ++checks;
    if (!los.elementary || !los.isomorphism_ok) return fail("Łoś check fails at atom " + std::to_string(e), checks);
  }
  return pass(checks);
}

// --- 4: compactness --------------------------------------------------------

std::vector<Json> compactness_instances(const Config& c) {
  Rng g = criterion_rng(c, 4);
  const Signature sig({{"R", 2}}, {}, {});
  const std::vector<Theory> theories{{}, {parse_formula("forall x. !R(x, x)")},
                                     {parse_formula("forall x, y. R(x, y) -> R(y, x)")}};
  std::vector<Json> out;
  for (int k = 0; k < 200; ++k) {
    ValueConstraint vc;
    const int lo = std::min(2, c.atoms);
    vc.algebra = BoolAlg(lo + draw(g, std::min(3, c.atoms) - lo + 1));
    vc.signature = sig;
    vc.parameters = draw(g, 3);
    const int count = 1 + draw(g, 4);
    for (int i = 0; i < count; ++i) {
      vc.formulas.push_back(random_formula(g, sig, 2, vc.parameters));
      const Element lower = coin(g) ? random_element(g, vc.algebra) : vc.algebra.zero();
      const Element upper = coin(g) ? lower | random_element(g, vc.algebra) : vc.algebra.one();
      vc.lower.push_back(lower);
      vc.upper.push_back(upper);
    }
    out.push_back(Json{{"constraint", io::to_json(vc)}, {"theory", io::to_json(theories[static_cast<std::size_t>(draw(g, 3))])}});
  }
  return out;
}

Outcome check_compactness(const Json& in, const Config& c) {
  const ValueConstraint vc = io::constraint_from_json(in.at("constraint"), "/constraint");
  const Theory theory = io::theory_from_json(in.at("theory"), &vc.signature, "/theory");
  const auto r = compactness_check_and_synthesize(vc, theory, c.bound, c.budget, Execution::kSerial);
  const FinderStatus literal = compactness_condition_literal(vc, theory, c.bound, c.budget);
  if (r.status == FinderStatus::kUnknown || literal == FinderStatus::kUnknown) return unknown("finder budget exhausted", 1);
  const bool check = std::all_of(r.per_atom.begin(), r.per_atom.end(), [](FinderStatus s) { return s == FinderStatus::kFound; });
  if (check != (literal == FinderStatus::kFound)) return fail("per-atom check disagrees with the literal condition", 1);
  if (check != r.structure.has_value()) return fail("per-atom check disagrees with synthesis", 1);
  std::size_t checks = 1;
  if (r.structure) {
    Assignment asg;
    asg.params = r.embedding;
    for (std::size_t i = 0; i < vc.formulas.size(); ++i) {
      const Element v = eval_bv(*r.structure, vc.formulas[i], asg);
      ++checks;
      if (!leq(vc.lower[i], v) || !leq(v, vc.upper[i])) {
        return fail("synthesized value of " + to_string(vc.formulas[i]) + " leaves its bounds", checks);
      }
    }
  }
  return pass(checks);
}

// --- 5: realization round trip -------------------------------------------

std::vector<Json> realization_instances(const Config& c) {
  Rng g = criterion_rng(c, 5);
  std::vector<Json> out;
  while (out.size() < 100) {
    const BoolAlg alg(1 + draw(g, std::min(3, c.atoms)));
    std::vector<Structure> fibers;
    for (int e = 0; e < alg.atom_count(); ++e) fibers.push_back(linear_order(2 + draw(g, 3)));
    const BValuedStructure host = make_bundle(alg, fibers);
    const int low = draw(g, host.size());
    const int high = draw(g, host.size());
    PartialType type{host, {"x"}, {Formula::relation("<", {Term::parameter(low), Term::variable("x")}),
                                   Formula::relation("<", {Term::variable("x"), Term::parameter(high)})}};
    const int atom = draw(g, alg.atom_count());
    // Least element realizing the type at U, if any.
    std::optional<int> realizer;
    for (int k = 0; k < host.size() && !realizer; ++k) {
      Assignment asg;
      for (int h = 0; h < host.size(); ++h) asg.params.push_back(h);
      asg.variables = {{"x", k}};
      bool all = true;
      for (const Formula& f : type.formulas) all = all && eval_bv(host, f, asg).contains_atom(atom);
      if (all) realizer = k;
    }
    if (!realizer) continue;
    out.push_back(Json{{"type", io::to_json(type)}, {"atom", atom}, {"realizer", std::vector<int>{*realizer}}});
  }
  return out;
}

Outcome check_realization(const Json& in, const Config&) {
  const PartialType type = io::type_from_json(in.at("type"), "/type");
  const PrincipalFilter u = PrincipalFilter::ultrafilter(type.host.algebra(), in.at("atom").get<int>());
  const std::vector<int> realizer = in.at("realizer").get<std::vector<int>>();
  const Distribution los = los_map_of_type(type);
  const Distribution b = realization_to_mult_refinement(type, realizer, u);
  if (!is_multiplicative_refinement(b, los, u)) return fail("refinement from the realizer is not a multiplicative refinement", 1);
  const Realization back = realize_from_mult_refinement(type, b, u);
  const Distribution b2 = realization_to_mult_refinement(type, back.elements, u);
  if (!is_multiplicative_refinement(b2, los, u)) return fail("second hop loses the refinement property", 2);
  for (Subset s = 0; s < b.values.size(); ++s) {
    if (!leq(b[s] & u.generator(), b2[s])) return fail("glued realization misses the refinement at {" + subset_key(s) + "}", 3);
  }
  return pass(3);
}

// --- 6: goodness -----------------------------------------------------------

std::vector<Json> goodness_instances(const Config& c) {
  std::vector<Json> out;
  for (int n = 1; n <= std::min(3, c.atoms); ++n) {
    const BoolAlg alg(n);
    for (const Element& gen : alg.all_elements()) {
      if (gen.is_zero()) continue;
      for (int m = 0; m <= 3; ++m) out.push_back(Json{{"filter", io::to_json(PrincipalFilter(gen))}, {"index", m}});
    }
  }
  return out;
}

Outcome check_goodness(const Json& in, const Config&) {
  const PrincipalFilter f = io::filter_from_json(in.at("filter"), "/filter");
  const int m = in.at("index").get<int>();
  const GoodnessReport r = is_good(f, m);
  if (!r.good) return fail("no verified witness for " + io::to_json(*r.counterexample).dump(), r.distributions);
  if (r.witnesses.size() != r.distributions) return fail("witness count differs from the distribution count");
  std::size_t k = 0;
  std::optional<std::string> bad;
  for_each_distribution_in(f, m, kDistributionCap, [&](const Distribution& a) {
    if (!bad && !is_multiplicative_refinement(r.witnesses[k], a, f)) bad = "witness " + std::to_string(k) + " fails re-verification";
    ++k;
  });
  if (bad) return fail(*bad, k);
  return pass(k);
}

// --- 7: witness sets -------------------------------------------------------

std::vector<Json> witness_set_instances(const Config&) {
  std::vector<Json> out;
  for (int s = 0; s <= 4; ++s) {
    const std::size_t subsets = std::size_t{1} << s;
    for (std::uint64_t fam = 0; fam < (std::uint64_t{1} << subsets); ++fam) {
      bool closed = true;
      for (Subset t = 0; t < subsets && closed; ++t) {
        if (!((fam >> t) & 1U)) continue;
        for (int i : subset_members(t)) closed = closed && ((fam >> (t & ~(Subset{1} << i))) & 1U);
      }
      if (!closed) continue;
      std::vector<std::string> keys;
      for (Subset t = 0; t < subsets; ++t) {
        if ((fam >> t) & 1U) keys.push_back(subset_key(t));
      }
      out.push_back(Json{{"size", s}, {"family", keys}});
    }
  }
  return out;
}

Outcome check_witness_sets(const Json& in, const Config&) {
  const int s = in.at("size").get<int>();
  std::vector<Subset> family;
  std::set<Subset> members;
  for (const auto& key : in.at("family")) {
    Subset t = 0;
    if (!parse_subset_key(key.get<std::string>(), s, t)) throw FormatError("/family", "bad key");
    family.push_back(t);
    members.insert(t);
  }
  const auto sets = goodness_witness_sets(s, family);
  std::size_t checks = 0;
  for (Subset t = 0; t <= full_subset(s); ++t) {
    // Meet over i ∈ t; the empty meet is every token.
    std::set<int> meet;
    for (std::size_t k = 0; k < family.size(); ++k) meet.insert(static_cast<int>(k));
    for (int i : subset_members(t)) {
      const auto& a = sets[static_cast<std::size_t>(i)];
      std::set<int> next;
      for (int x : a) {
        if (meet.contains(x)) next.insert(x);
      }
      meet = std::move(next);
    }
    ++checks;
    if (meet.empty() == members.contains(t)) {
      return fail("meet over {" + subset_key(t) + "} is " + (meet.empty() ? "empty" : "nonempty"), checks);
    }
  }
  return pass(checks);
}

// --- 8: refinement step ----------------------------------------------------

std::vector<Json> refinement_step_instances(const Config& c) {
  Rng g = criterion_rng(c, 8);
  const int max_atoms = c.atoms >= 3 ? 8 : c.atoms;
  int max_m = 0;
  while (max_m < 3 && (2 << max_m) <= max_atoms) ++max_m;
  std::vector<Json> out;
  for (int k = 0; k < 1000; ++k) {
    const int m = draw(g, max_m + 1);
    const int keys = 1 << m;
    const BoolAlg alg(keys + draw(g, max_atoms - keys + 1));
    const PrincipalFilter e(random_element(g, alg, true));
    const Distribution a = random_distribution(g, alg, m, e.generator());
    // d_I takes an atom of e ∧ A(I) so the filter stays proper; the other
    // keys get one atom each, the rest are spread or left out.
    const auto meet_atoms = (e.generator() & a[full_subset(m)]).atoms();
    const int anchor = meet_atoms[static_cast<std::size_t>(draw(g, static_cast<int>(meet_atoms.size())))];
    std::vector<int> label(static_cast<std::size_t>(alg.atom_count()), -2);
    label[static_cast<std::size_t>(anchor)] = static_cast<int>(full_subset(m));
    std::vector<int> free_atoms;
    for (int x = 0; x < alg.atom_count(); ++x) {
      if (x != anchor) free_atoms.push_back(x);
    }
    std::shuffle(free_atoms.begin(), free_atoms.end(), g);
    std::size_t next = 0;
    for (Subset t = 0; t + 1 < static_cast<Subset>(keys); ++t) label[static_cast<std::size_t>(free_atoms[next++])] = static_cast<int>(t);
    for (; next < free_atoms.size(); ++next) label[static_cast<std::size_t>(free_atoms[next])] = draw(g, keys + 1) - 1;
    IndexedAntichain d{m, {}};
    for (Subset t = 0; t < static_cast<Subset>(keys); ++t) {
      AtomMask mask = 0;
      for (int x = 0; x < alg.atom_count(); ++x) {
        if (label[static_cast<std::size_t>(x)] == static_cast<int>(t)) mask |= AtomMask{1} << x;
      }
      d.members.emplace(t, alg.element(mask));
    }
    out.push_back(Json{{"filter", io::to_json(e)}, {"antichain", io::to_json(d, alg)}, {"distribution", io::to_json(a)}});
  }
  return out;
}

Outcome check_refinement_step(const Json& in, const Config&) {
  const PrincipalFilter e = io::filter_from_json(in.at("filter"), "/filter");
  const IndexedAntichain d = io::antichain_from_json(in.at("antichain"), "/antichain");
  const Distribution a = io::distribution_from_json(in.at("distribution"), "/distribution");
  const RefinementStep r = refinement_step(e, d, a);
  const Distribution& b = r.refinement;
  if (!is_multiplicative(b)) return fail("B is not multiplicative", 1);
  for (Subset s = 1; s < b.values.size(); ++s) {
    if (!leq(b[s], a[s])) return fail("B exceeds A at {" + subset_key(s) + "}", 2);
  }
  // E ∪ range(B) has the FIP: the new generator is nonzero and below all of it.
  const Element top = r.filter.generator();
  if (top.is_zero() || !leq(top, e.generator())) return fail("new filter is not proper or drops E", 3);
  for (const Element& v : b.values) {
    if (!leq(top, v)) return fail("new filter misses a value of B", 3);
  }
  return pass(3);
}

// --- 9: separation of variables -------------------------------------------

std::vector<Json> separation_instances(const Config& c) {
  Rng g = criterion_rng(c, 9);
  const int max_source = std::min(4, c.atoms + 1);
  std::vector<Json> out;
  while (out.size() < 200) {
    const int m = 1 + draw(g, max_source);
    const int k = 1 + draw(g, std::min(3, m));
    std::vector<int> points(static_cast<std::size_t>(m));
    std::iota(points.begin(), points.end(), 0);
    std::shuffle(points.begin(), points.end(), g);
    points.resize(static_cast<std::size_t>(k));
    const AlgebraHom j = hom_from_atom_map(BoolAlg(m), BoolAlg(k), points);
    std::vector<Structure> fibers;
    for (int e = 0; e < m; ++e) fibers.push_back(linear_order(2 + draw(g, 2)));
    const BValuedStructure host = make_bundle(j.source(), fibers);
    const int low = draw(g, host.size());
    const int high = draw(g, host.size());
    PartialType type{host, {"x"}, {Formula::relation("<", {Term::parameter(low), Term::variable("x")}),
                                   Formula::relation("<", {Term::variable("x"), Term::parameter(high)})}};
    Distribution a0;
    try {
      a0 = los_map_of_type(type);
    } catch (const Error&) {
      continue;  // inconsistent everywhere
    }
    std::vector<int> visible;
    for (int y = 0; y < k; ++y) {
      if (a0[full_subset(2)].contains_atom(points[static_cast<std::size_t>(y)])) visible.push_back(y);
    }
    if (visible.empty()) continue;
    out.push_back(Json{{"hom", io::to_json(j)}, {"type", io::to_json(type)},
                       {"ultrafilter_atom", visible[static_cast<std::size_t>(draw(g, static_cast<int>(visible.size())))]}});
  }
  return out;
}

Outcome check_separation(const Json& in, const Config& c) {
  const AlgebraHom j = io::hom_from_json(in.at("hom"), "/hom");
  const PartialType type = io::type_from_json(in.at("type"), "/type");
  const PrincipalFilter u1 = PrincipalFilter::ultrafilter(j.target(), in.at("ultrafilter_atom").get<int>());
  const PrincipalFilter u0 = preimage_filter(j, u1);
  const Distribution a0 = los_map_of_type(type);
  if (!is_in_filter(a0, u0)) return fail("type-derived A0 is not in U0");
  const Distribution a1 = pushforward(j, a0);
  std::size_t checks = 0;
  if (pushforward(j, pullback_distribution(j, a1)) != a1) return fail("pullback does not push forward to A1", checks);
  ++checks;
  if (pushforward(j, pullback_distribution(j, pushforward(j, a0))) != a1) return fail("round trip from A0 changes A1", checks);
  ++checks;
  const auto b1 = find_multiplicative_refinement(a1, u1);
  if (!b1) return fail("j∘A0 has no multiplicative refinement in U1", checks);
  if (!is_multiplicative_refinement(pull_back_mult_refinement(j, a0, u0, *b1, u1), a0, u0)) {
    return fail("lifted refinement fails", checks);
  }
  ++checks;
  const auto b0 = find_multiplicative_refinement(a0, u0);
  if (!b0) return fail("A0 has no multiplicative refinement in U0", checks);
  if (!is_multiplicative_refinement(pushforward(j, *b0), a1, u1)) return fail("pushed refinement fails", checks);
  ++checks;
  CriterionOptions opts;
  opts.theory = linear_order_theory();
  opts.bound = c.bound;
  opts.budget = c.budget;
  opts.execution = Execution::kSerial;
  const auto r = los_transfer_check(j, a0, interval_sequence(), opts);
  ++checks;
  if (!r.decided) return unknown("Łoś criterion undecided", checks);
  if (!r.agree) {
    return fail(std::string("Łoś map on the source is ") + std::string(truth_name(r.source)) + ", on the target " +
                    std::string(truth_name(r.target)),
                checks);
  }
  return pass(checks);
}

// --- 10: criteria against their literal definitions ----------------------

std::vector<Json> criteria_instances(const Config& c) {
  Rng g = criterion_rng(c, 10);
  const auto tiny = tiny_instances();
  std::vector<Json> out;
  for (std::size_t which = 0; which < tiny.size(); ++which) {
    for (int k = 0; k < 12; ++k) {
      const BoolAlg alg(1 + draw(g, std::min(2, c.atoms)));
      const int m = draw(g, 3);
      const Distribution a = random_distribution(g, alg, m, random_element(g, alg, true));
      FormulaSequence seq = tiny[which].first;
      seq.formulas.erase(seq.formulas.begin() + m, seq.formulas.end());
      out.push_back(Json{{"distribution", io::to_json(a)}, {"sequence", io::to_json(seq)}, {"theory", io::to_json(tiny[which].second)}});
    }
  }
  return out;
}

// The witness realizes the target table exactly.
bool witness_realizes(const CriterionReport& r, const Distribution& target, const FormulaSequence& seq) {
  if (!r.structure) return false;
  Assignment asg;
  asg.params = r.params;
  for (Subset t = 0; t < target.values.size(); ++t) {
    if (eval_bv(*r.structure, existential_conjunction(seq, t), asg) != target[t]) return false;
  }
  return true;
}

Outcome check_criteria(const Json& in, const Config& c) {
  const Distribution a = io::distribution_from_json(in.at("distribution"), "/distribution");
  const FormulaSequence seq = io::sequence_from_json(in.at("sequence"), "/sequence");
  CriterionOptions opts;
  opts.theory = io::theory_from_json(in.at("theory"), &seq.signature, "/theory");
  opts.bound = c.bound;
  opts.budget = c.budget;
  opts.execution = Execution::kSerial;
  const auto los = los_map_criterion(a, seq, opts);
  const Truth los_literal = los_map_criterion_literal(a, seq, opts);
  const auto pos = possibility_criterion(a, seq, opts);
  const Truth pos_literal = possibility_criterion_literal(a, seq, opts);
  if (los.verdict == Truth::kUnknown || los_literal == Truth::kUnknown || pos.verdict == Truth::kUnknown ||
      pos_literal == Truth::kUnknown) {
    return unknown("criterion undecided", 2);
  }
  if (los.verdict != los_literal) return fail("Łoś-map criterion disagrees with its literal form", 1);
  if (pos.verdict != pos_literal) return fail("possibility criterion disagrees with its literal form", 2);
  if (los.verdict == Truth::kTrue && !witness_realizes(los, a, seq)) return fail("Łoś-map witness does not realize A", 3);
  if (pos.verdict == Truth::kTrue) {
    if (!pos.los_map || !witness_realizes(pos, *pos.los_map, seq) || !conservatively_refines(a, *pos.los_map)) {
      return fail("possibility witness is not a conservatively refined Łoś map", 4);
    }
  }
  // Every Łoś map is a possibility.
  if (los.verdict == Truth::kTrue && pos.verdict != Truth::kTrue) return fail("Łoś map that is not a possibility", 5);
  return pass(5);
}

// --- 11: regular sequences -------------------------------------------------

std::vector<Json> regular_instances(const Config& c) {
  Rng g = criterion_rng(c, 11);
  std::vector<Json> out;
  for (int k = 0; k < 60; ++k) {
    const int m = c.atoms == 1 ? 1 : 1 + draw(g, 3);
    const int degree = c.atoms == 1 ? 1 : 1 + draw(g, std::min(2, m));
    std::vector<Subset> keys;
    for (Subset t = 1; t <= full_subset(m); ++t) {
      if (subset_size(t) <= degree) keys.push_back(t);
    }
    const int n = static_cast<int>(keys.size()) + draw(g, 3);
    const BoolAlg alg(n);
    std::vector<int> atoms(static_cast<std::size_t>(n));
    std::iota(atoms.begin(), atoms.end(), 0);
    std::shuffle(atoms.begin(), atoms.end(), g);
    std::vector<AtomMask> masks(keys.size(), 0);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::size_t slot = i < keys.size() ? i : static_cast<std::size_t>(draw(g, static_cast<int>(keys.size())));
      masks[slot] |= AtomMask{1} << atoms[i];
    }
    IndexedAntichain d{m, {}};
    for (std::size_t i = 0; i < keys.size(); ++i) d.members.emplace(keys[i], alg.element(masks[i]));
    out.push_back(Json{{"antichain", io::to_json(d, alg)}, {"degree", degree}});
  }
  return out;
}

Outcome check_regular(const Json& in, const Config&) {
  const IndexedAntichain d = io::antichain_from_json(in.at("antichain"), "/antichain");
  const int degree = in.at("degree").get<int>();
  const RegularSequence rs = regular_sequence_from_antichain(d, degree);
  const auto& r = rs.report;
  if (r.fip_up_to < std::min(degree, static_cast<int>(rs.members.size()))) return fail("some meet of at most k members is zero", 1);
  if (!r.degree_bound_holds) return fail("degree bound fails", 2);
  if (!r.deciding_dense) return fail("deciding elements are not dense", 3);
  const auto direct = regular_sequence_report(rs.members, degree);
  if (direct.fip_up_to != r.fip_up_to || direct.degree_bound_holds != r.degree_bound_holds ||
      direct.deciding_dense != r.deciding_dense) {
    return fail("construction report disagrees with the direct check", 4);
  }
  return pass(4);
}

// --- 12: parser round trip and determinism -------------------------------

std::vector<Json> parser_instances(const Config& c) {
  Rng g = criterion_rng(c, 12);
  const Signature sig({{"R", 2}, {"P", 1}}, {{"f", 1}}, {"c"});
  std::vector<Json> out;
  for (int k = 0; k < 1000; ++k) out.push_back(Json{{"formula", to_string(random_formula(g, sig, 4, 2))}});
  out.push_back(Json{{"determinism", true}});
  return out;
}

Outcome check_parser(const Json& in, const Config& c) {
  if (in.contains("determinism")) {
    Config small = c;
    small.atoms = std::min(c.atoms, 2);
    small.only = {6, 7, 8, 11};
    const std::string first = io::dump(to_json(run(small)));
    const std::string second = io::dump(to_json(run(small)));
    return first == second ? pass(1) : fail("two runs with the same seed differ", 1);
  }
  const Signature sig({{"R", 2}, {"P", 1}}, {{"f", 1}}, {"c"});
  const std::string text = in.at("formula").get<std::string>();
  const Formula f = parse_formula(text, &sig);
  if (to_string(f) != text) return fail("printing the parse changes the text: " + to_string(f), 1);
  if (!(parse_formula(to_string(f), &sig) == f)) return fail("reparse gives a different tree", 2);
  return pass(2);
}

using Generator = std::vector<Json> (*)(const Config&);
using Checker = Outcome (*)(const Json&, const Config&);

struct Entry {
  Generator generate;
  Checker check;
};

std::vector<Json> bundle_family_1(const Config& c) { return bundle_family(c, 1); }
std::vector<Json> bundle_family_2(const Config& c) { return bundle_family(c, 2); }

const Entry kEntries[] = {
    {bundle_family_1, check_dual_evaluation},         {bundle_family_2, check_specialization_family},
    {ultrapower_instances, check_ultrapower},         {compactness_instances, check_compactness},
    {realization_instances, check_realization},       {goodness_instances, check_goodness},
    {witness_set_instances, check_witness_sets},      {refinement_step_instances, check_refinement_step},
    {separation_instances, check_separation},         {criteria_instances, check_criteria},
    {regular_instances, check_regular},               {parser_instances, check_parser},
};

const Entry& entry(int id) {
  if (id < 1 || id > 12) throw FormatError("/criterion", "criterion id must be 1..12");
  return kEntries[id - 1];
}

}  // namespace

std::span<const CriterionInfo> criteria() { return kCriteria; }

void validate(const Config& c) {
  if (c.atoms < 1 || c.atoms > 3) throw FormatError("/atoms", "atoms cap must be 1..3");
  if (c.rank < 0 || c.rank > 2) throw FormatError("/rank", "rank must be 0..2");
  if (c.bound < 1 || c.bound > 4) throw FormatError("/bound", "finder bound must be 1..4");
  if (c.budget == 0) throw FormatError("/budget", "budget must be positive");
  for (int id : c.only) {
    if (id < 1 || id > 12) throw FormatError("/only", "criterion ids are 1..12");
  }
  if (!c.mutant.empty() && c.mutant != "flip-complement") throw FormatError("/mutant", "unknown mutant " + c.mutant);
}

Json to_json(const Config& c) {
  Json j{{"seed", c.seed}, {"atoms", c.atoms}, {"rank", c.rank}, {"bound", c.bound}, {"budget", c.budget}, {"only", c.only}};
  if (!c.mutant.empty()) j["mutant"] = c.mutant;
  return j;
}

Config config_from_json(const Json& j, const std::string& at) {
  Config c;
  try {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.atoms = j.at("atoms").get<int>();
    c.rank = j.at("rank").get<int>();
    c.bound = j.at("bound").get<int>();
    c.budget = j.at("budget").get<std::uint64_t>();
    c.only = j.value("only", std::vector<int>{});
    c.mutant = j.value("mutant", std::string{});
  } catch (const Json::exception& e) {
    throw FormatError(at, std::string("bad suite config: ") + e.what());
  }
  validate(c);
  return c;
}

std::vector<Json> instances(int id, const Config& config) { return entry(id).generate(config); }

Outcome check_instance(int id, const Json& input, const Config& config) {
  try {
    return entry(id).check(input, config);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    return fail(std::string(error_kind_name(e.kind())) + ": " + e.what());
  } catch (const Json::exception& e) {
    throw FormatError("", std::string("bad instance: ") + e.what());
  }
}

CriterionResult run_criterion(int id, const Config& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const auto& info = kCriteria[id - 1];
  CriterionResult result;
  result.id = id;
  result.name = std::string(info.name);
  const std::vector<Json> inputs = instances(id, config);
  std::vector<Outcome> outcomes(inputs.size());
  for_each_index(inputs.size(), config.execution, [&](std::size_t i) { outcomes[i] = check_instance(id, inputs[i], config); });
  result.instances = inputs.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    result.checks += outcomes[i].checks;
    if (outcomes[i].status == Status::kUnknown) ++result.unknown;
    if (outcomes[i].status == Status::kFail && !result.counterexample) {
      result.counterexample = Counterexample{id, i, inputs[i], outcomes[i].detail};
    }
  }
  result.status = result.counterexample ? Status::kFail : result.unknown > 0 ? Status::kUnknown : Status::kPass;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Status Report::status() const {
  bool any_unknown = false;
  for (const auto& c : criteria) {
    if (c.status == Status::kFail) return Status::kFail;
    any_unknown = any_unknown || c.status == Status::kUnknown;
  }
  return any_unknown ? Status::kUnknown : Status::kPass;
}

Report run(const Config& config) {
  validate(config);
  Report report;
  report.config = config;
  for (const auto& info : kCriteria) {
    if (!config.only.empty() && std::find(config.only.begin(), config.only.end(), info.id) == config.only.end()) continue;
    report.criteria.push_back(run_criterion(info.id, config));
  }
  return report;
}

Json to_json(const Report& report, bool timing) {
  Json list = Json::array();
  for (const auto& r : report.criteria) {
    Json j{{"id", r.id}, {"name", r.name}, {"status", status_name(r.status)}, {"instances", r.instances},
           {"checks", r.checks}, {"unknown", r.unknown}};
    if (r.counterexample) {
      j["counterexample"] = Json{{"criterion", r.counterexample->criterion}, {"instance", r.counterexample->instance},
                                 {"input", r.counterexample->input}, {"detail", r.counterexample->detail}};
    }
    if (timing) j["seconds"] = r.seconds;
    list.push_back(j);
  }
  return Json{{"config", to_json(report.config)}, {"criteria", list}, {"status", status_name(report.status())}};
}

std::string summary(const Report& report) {
  std::ostringstream out;
  for (const auto& r : report.criteria) {
    out << "criterion " << r.id << " " << r.name << ": " << status_name(r.status) << " (" << r.instances
        << " instances, " << r.checks << " checks";
    if (r.unknown) out << ", " << r.unknown << " unknown";
    out << ")\n";
    if (r.counterexample) out << "  counterexample #" << r.counterexample->instance << ": " << r.counterexample->detail << "\n";
  }
  out << "overall: " << status_name(report.status()) << "\n";
  return out.str();
}

Outcome replay(const Json& cex, const Config& config) {
  if (!cex.is_object() || !cex.contains("criterion") || !cex.contains("input")) {
    throw FormatError("", "counterexample needs \"criterion\" and \"input\"");
  }
  if (!cex.at("criterion").is_number_integer()) throw FormatError("/criterion", "expected an integer");
  return check_instance(cex.at("criterion").get<int>(), cex.at("input"), config);
}

Formula mutated_formula(const std::string& mutant, const Formula& formula) {
  if (mutant.empty()) return formula;
  if (mutant != "flip-complement") throw FormatError("/mutant", "unknown mutant " + mutant);
  bool done = false;
  return drop_first_negation(formula, done);
}

}  // namespace bvm::suite
