#include <map>

#include "bvm/bvalued.hpp"
#include "bvm/generators.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bvm;
using bvm::test::error_of;

namespace {

Structure order_with_pairs(int size, std::initializer_list<std::pair<int, int>> pairs) {
  Structure m(Signature({{"<", 2}}, {}, {}), size);
  for (auto [a, b] : pairs) {
    const int args[] = {a, b};
    m.set_holds(0, args, true);
  }
  return m;
}

Structure unary(int size, std::initializer_list<int> members) {
  Structure m(Signature({{"P", 1}}, {}, {}), size);
  for (int a : members) {
    const int args[] = {a};
    m.set_holds(0, args, true);
  }
  return m;
}

Theory linear_order_theory() {
  return {parse_formula("forall x. !(x < x)"), parse_formula("forall x, y, z. (x < y & y < z) -> x < z"),
          parse_formula("forall x, y. x < y | x = y | y < x")};
}

Element value(const BValuedStructure& m, const char* text, std::vector<int> params,
              Engine engine = Engine::kRecursive) {
  Assignment a;
  a.params = std::move(params);
  return eval_bv(m, parse_formula(text), a, engine);
}

// Iso from the fiber at `atom` to the quotient specialization, read off
// through the element projections.
std::vector<int> fiber_to_quotient(const Specialization& fiber, const Specialization& quotient) {
  std::vector<int> map(static_cast<std::size_t>(fiber.structure.size()), -1);
  for (std::size_t k = 0; k < fiber.projection.size(); ++k) {
    map[static_cast<std::size_t>(fiber.projection[k])] = quotient.projection[k];
  }
  return map;
}

}  // namespace

TEST_SUITE("bvalued") {

TEST_CASE("make_bundle") {
  BoolAlg p2(2);
  const auto m = make_bundle(p2, {linear_order(2), linear_order(2)});
  CHECK(m.size() == 4);
  CHECK(m.bundle().elements[1] == std::vector<int>{0, 1});
  const auto one = make_bundle(BoolAlg(1), {linear_order(3)});
  CHECK(one.size() == 3);
  CHECK(error_of([&] { (void)make_bundle(p2, {linear_order(2), linear_order(2), linear_order(2)}); }) ==
        ErrorKind::kFiberCountMismatch);
  CHECK(error_of([&] { (void)make_bundle(p2, {linear_order(2), linear_order(2)}, {{{0, 2}, {1, 0}}}); }) ==
        ErrorKind::kInvalidTuple);
  // Coordinate 1 never takes the value 1.
  CHECK(error_of([&] { (void)make_bundle(p2, {linear_order(2), linear_order(2)}, {{{0, 0}, {1, 0}}}); }) ==
        ErrorKind::kInvalidTuple);
  CHECK(error_of([&] {
          (void)make_bundle(p2, {linear_order(2), linear_order(2)}, {{{0, 0}, {1, 1}, {0, 0}}});
        }) == ErrorKind::kInvalidTuple);
}

TEST_CASE("eval_bv examples") {
  BoolAlg p2(2);
  const auto m = make_bundle(p2, {linear_order(2), order_with_pairs(2, {})}, {{{0, 0}, {1, 1}}});
  CHECK(value(m, "#0 = #0", {0}).is_one());
  CHECK(value(m, "#0 < #1", {0, 1}) == p2.element({0}));
  CHECK(value(m, "#0 < #1", {0, 1}, Engine::kCoordinatewise) == p2.element({0}));
  CHECK(error_of([&] { (void)value(m, "#0 < #1", {0, 2}); }) == ErrorKind::kForeignParameter);
  Assignment named;
  named.variables = {{"x", 1}};
  CHECK(eval_bv(m, parse_formula("exists y. y < x"), named) == p2.element({0}));
}

TEST_CASE("negation is complement on random instances") {
  Rng g(3);
  const Signature sig({{"R", 2}}, {}, {"c"});
  for (int i = 0; i < 100; ++i) {
    BoolAlg b(1 + draw(g, 3));
    const auto m = random_bundle(g, b, sig, 3, 6);
    const Formula f = random_formula(g, sig, 3, 1);
    Assignment a;
    a.params = {draw(g, m.size())};
    CHECK(eval_bv(m, Formula::negation(f), a) == ~eval_bv(m, f, a));
  }
}

TEST_CASE("recursive and coordinatewise engines agree") {
  Rng g(4);
  const Signature sig({{"R", 2}}, {{"f", 1}}, {"c"});
  for (int i = 0; i < 200; ++i) {
    BoolAlg b(1 + draw(g, 3));
    const auto m = random_bundle(g, b, sig, 3, 6);
    const Formula f = random_formula(g, sig, 4, 2);
    Assignment a;
    a.params = {draw(g, m.size()), draw(g, m.size())};
    REQUIRE_MESSAGE(eval_bv(m, f, a) == eval_bv(m, f, a, Engine::kCoordinatewise), to_string(f));
    const auto t = to_abstract(m);
    REQUIRE_MESSAGE(eval_bv(t, f, a) == eval_bv(m, f, a), to_string(f));
    REQUIRE(eval_bv(t, f, a, Engine::kCoordinatewise) == eval_bv(m, f, a));
  }
}

TEST_CASE("universal value is the attained minimum on full structures") {
  Rng g(6);
  const Signature sig({{"R", 2}}, {}, {"c"});
  for (int i = 0; i < 60; ++i) {
    BoolAlg b(1 + draw(g, 3));
    std::vector<Structure> fibers;
    for (int e = 0; e < b.atom_count(); ++e) fibers.push_back(random_structure(g, sig, 1 + draw(g, 3)));
    const auto m = make_bundle(b, fibers);
    const Formula body = random_formula(g, sig, 2, 1, std::vector<std::string>{"x"});
    Assignment a;
    a.params = {draw(g, m.size())};
    const Element all = eval_bv(m, Formula::forall("x", body), a);
    bool attained = false;
    for (int x = 0; x < m.size(); ++x) {
      Assignment ax = a;
      ax.variables = {{"x", x}};
      const Element v = eval_bv(m, body, ax);
      CHECK(leq(all, v));
      attained = attained || v == all;
    }
    CHECK(attained);
  }
}

TEST_CASE("fullness") {
  BoolAlg p2(2);
  const auto product = make_bundle(p2, {linear_order(2), linear_order(3)});
  for (int r = 0; r <= 2; ++r) CHECK(fullness_check(product, r).full);

  const auto split = make_bundle(p2, {unary(2, {0}), unary(2, {1})}, {{{0, 0}, {1, 1}}});
  const auto report = fullness_check(split, 1);
  CHECK_FALSE(report.full);
  REQUIRE(report.counterexample);
  CHECK(to_string(report.counterexample->formula) == "P(x)");
  CHECK(report.counterexample->expected.is_one());
  CHECK(report.counterexample->actual.popcount() == 1);

  Rng g(8);
  const Signature sig({{"R", 2}}, {}, {"c"});
  for (int i = 0; i < 5; ++i) {
    CHECK(fullness_check(make_bundle(BoolAlg(1), {random_structure(g, sig, 1 + draw(g, 3))}), 2).full);
  }
}

TEST_CASE("specialization") {
  BoolAlg p2(2);
  const auto m = make_bundle(p2, {linear_order(2), order_with_pairs(3, {{2, 0}})},
                             {{{0, 0}, {1, 1}, {1, 2}, {0, 2}}});
  const auto at0 = specialize(m, PrincipalFilter::ultrafilter(p2, 0));
  CHECK(at0.structure == linear_order(2));
  CHECK(at0.projection == std::vector<int>{0, 1, 1, 0});
  CHECK(error_of([&] { (void)specialize(m, PrincipalFilter::trivial(p2)); }) == ErrorKind::kNotUltrafilter);
  for (int e = 0; e < 2; ++e) {
    const auto u = PrincipalFilter::ultrafilter(p2, e);
    const auto fiber = specialize(m, u);
    const auto quotient = specialize_by_quotient(m, u);
    CHECK(is_isomorphism(fiber.structure, quotient.structure, fiber_to_quotient(fiber, quotient)));
    CHECK(check_specialization(m, u, 2).holds);
  }
  const auto single = make_bundle(BoolAlg(1), {linear_order(3)});
  CHECK(specialize(single, PrincipalFilter::ultrafilter(BoolAlg(1), 0)).structure == linear_order(3));
}

TEST_CASE("conversion round trip") {
  Rng g(12);
  const Signature sig({{"R", 2}}, {{"f", 1}}, {"c"});
  for (int i = 0; i < 20; ++i) {
    BoolAlg p2(2);
    const auto m = random_bundle(g, p2, sig, 3, 3);
    const auto t = to_abstract(m);
    const auto back = to_bundle(t);
    CHECK(to_abstract(back).tables().equality == t.tables().equality);
    CHECK(to_abstract(back).tables().relations == t.tables().relations);
    CHECK(to_abstract(back).tables().functions == t.tables().functions);
    CHECK(to_abstract(back).tables().constants == t.tables().constants);
    for (int k = 0; k < 10; ++k) {
      const Formula f = random_formula(g, sig, 3, 1);
      Assignment a;
      a.params = {draw(g, m.size())};
      CHECK(eval_bv(back, f, a) == eval_bv(m, f, a));
    }
  }
  const auto one = make_bundle(BoolAlg(1), {linear_order(2)});
  CHECK(to_bundle(to_abstract(one)).bundle().fibers[0] == linear_order(2));
}

TEST_CASE("abstract validation names the violated clause") {
  BoolAlg p2(2);
  AbstractData same;
  same.size = 2;
  same.equality.assign(4, p2.one());
  try {
    (void)make_abstract(p2, Signature(), same);
    FAIL("expected an axiom violation");
  } catch (const AxiomViolation& e) {
    CHECK(e.clause() == 7);
  }
  AbstractData asym;
  asym.size = 2;
  asym.equality = {p2.one(), p2.atom(0), p2.atom(1), p2.one()};
  try {
    (void)make_abstract(p2, Signature(), asym);
    FAIL("expected an axiom violation");
  } catch (const AxiomViolation& e) {
    CHECK(e.clause() == 3);
  }
  AbstractData incongruent;
  incongruent.size = 2;
  incongruent.equality = {p2.one(), p2.atom(0), p2.atom(0), p2.one()};
  incongruent.relations = {{p2.one(), p2.zero()}};
  try {
    (void)make_abstract(p2, Signature({{"P", 1}}, {}, {}), incongruent);
    FAIL("expected an axiom violation");
  } catch (const AxiomViolation& e) {
    CHECK(e.clause() == 3);
  }
}

TEST_CASE("elementary maps") {
  BoolAlg p2(2);
  const auto m = make_bundle(p2, {linear_order(2), linear_order(3)});
  ElementMap id;
  for (int i = 0; i < m.size(); ++i) id.emplace_back(i, i);
  for (int r = 0; r <= 2; ++r) CHECK(check_elementary(id, m, m, r).elementary);

  const Signature sig({{"P", 1}}, {}, {"c"});
  Structure yes(sig, 1), no(sig, 1);
  const int zero[] = {0};
  yes.set_holds(0, zero, true);
  const auto a = make_bundle(p2, {yes, yes});
  const auto b = make_bundle(p2, {yes, no});
  const auto report = check_elementary({{0, 0}}, a, b, 0);
  CHECK_FALSE(report.elementary);
  REQUIRE(report.counterexample);
  CHECK(quantifier_rank(report.counterexample->formula) == 0);

  const auto collapse = check_elementary({{0, 0}, {1, 0}}, m, m, 0);
  CHECK_FALSE(collapse.injective);
  CHECK_FALSE(collapse.elementary);
}

TEST_CASE("compactness examples") {
  BoolAlg p2(2);
  ValueConstraint vc;
  vc.algebra = p2;
  vc.signature = Signature({{"P", 1}}, {}, {});
  vc.parameters = 1;
  vc.formulas = {parse_formula("P(#0)")};
  vc.lower = {p2.atom(0)};
  vc.upper = {p2.atom(0)};
  const auto r = compactness_check_and_synthesize(vc, {}, 2);
  REQUIRE(r.status == FinderStatus::kFound);
  Assignment a;
  a.params = r.embedding;
  CHECK(eval_bv(*r.structure, vc.formulas[0], a) == p2.atom(0));
  CHECK(compactness_condition_literal(vc, {}, 2) == FinderStatus::kFound);

  ValueConstraint contra = vc;
  contra.formulas = {parse_formula("P(#0)"), parse_formula("!P(#0)")};
  contra.lower = {p2.one(), p2.one()};
  contra.upper = {p2.one(), p2.one()};
  CHECK(compactness_check_and_synthesize(contra, {}, 3).status == FinderStatus::kNone);
  CHECK(compactness_condition_literal(contra, {}, 3) == FinderStatus::kNone);

  ValueConstraint bad = vc;
  bad.lower = {p2.one()};
  CHECK(error_of([&] { (void)compactness_check_and_synthesize(bad, {}, 2); }) == ErrorKind::kBadConstraint);
}

TEST_CASE("serial and parallel compactness agree") {
  Rng g(31);
  const Signature sig({{"R", 2}}, {}, {});
  for (int i = 0; i < 20; ++i) {
    BoolAlg b(2 + draw(g, 2));
    ValueConstraint vc;
    vc.algebra = b;
    vc.signature = sig;
    vc.parameters = 2;
    for (int k = 0; k < 3; ++k) {
      vc.formulas.push_back(random_formula(g, sig, 2, 2));
      const Element lo = random_element(g, b);
      vc.lower.push_back(lo);
      vc.upper.push_back(lo | random_element(g, b));
    }
    const auto s = compactness_check_and_synthesize(vc, {}, 3, default_node_budget(), Execution::kSerial);
    const auto p = compactness_check_and_synthesize(vc, {}, 3, default_node_budget(), Execution::kParallel);
    CHECK(s.per_atom == p.per_atom);
    CHECK(s.embedding == p.embedding);
  }
}

TEST_CASE("amalgamation") {
  BoolAlg p2(2);
  const auto base = make_bundle(p2, {linear_order(2), linear_order(2)});
  ElementMap id;
  for (int i = 0; i < base.size(); ++i) id.emplace_back(i, i);
  const auto same = amalgamate_bounded(base, base, base, id, id, 2, 2);
  REQUIRE(same.status == FinderStatus::kFound);
  CHECK(same.into_from_first == id);
  CHECK(same.into_from_second == id);
  CHECK(same.elementary_rank == 2);

  // One extension adds a new least point, the other a new greatest point.
  const auto low = make_bundle(p2, {linear_order(3), linear_order(3)});
  const auto high = make_bundle(p2, {linear_order(3), linear_order(3)});
  auto index3 = [](int a, int b) { return a * 3 + b; };
  ElementMap to_low, to_high;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      to_low.emplace_back(a * 2 + b, index3(a + 1, b + 1));
      to_high.emplace_back(a * 2 + b, index3(a, b));
    }
  }
  const auto amalgam = amalgamate_bounded(base, low, high, to_low, to_high, 0, 4, linear_order_theory());
  REQUIRE(amalgam.status == FinderStatus::kFound);
  for (const Structure& f : amalgam.structure->bundle().fibers) CHECK(f.size() == 4);
  CHECK(amalgam.elementary_rank >= 0);
  std::map<int, int> f0(amalgam.into_from_first.begin(), amalgam.into_from_first.end());
  std::map<int, int> f1(amalgam.into_from_second.begin(), amalgam.into_from_second.end());
  for (int m = 0; m < base.size(); ++m) CHECK(f0.at(to_low[static_cast<std::size_t>(m)].second) == f1.at(to_high[static_cast<std::size_t>(m)].second));

  const auto point = make_bundle(p2, {linear_order(1), linear_order(1)});
  const auto pair = make_bundle(p2, {linear_order(2), linear_order(2)});
  const ElementMap to_pair = {{0, 0}};
  CHECK(amalgamate_bounded(point, pair, pair, to_pair, to_pair, 0, 1).status == FinderStatus::kUnknown);

  CHECK(error_of([&] { (void)amalgamate_bounded(base, low, high, to_low, to_high, 1, 4); }) ==
        ErrorKind::kNotElementary);
}

}  // TEST_SUITE
