#include "bvm/generators.hpp"
#include "bvm/logic.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bvm;
using bvm::test::error_of;

TEST_SUITE("logic") {

TEST_CASE("parse examples") {
  const Formula f = parse_formula("exists x. (R(x,y) & !(x = c))");
  CHECK(free_vars(f) == std::set<std::string>{"y"});
  const Formula g = parse_formula("forall x. x = x");
  CHECK(is_sentence(g));
  CHECK(quantifier_rank(g) == 1);
  try {
    (void)parse_formula("exists x (");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 9);
  }
}

TEST_CASE("parse against a signature") {
  Signature sig({{"R", 2}}, {{"f", 1}}, {"c"});
  const Formula f = parse_formula("exists x. R(f(x), c)", &sig);
  CHECK(f.child(0).terms()[0].kind() == Term::Kind::kFunction);
  CHECK(f.child(0).terms()[1].kind() == Term::Kind::kConstant);
  CHECK(error_of([&] { (void)parse_formula("S(c)", &sig); }) == ErrorKind::kUnknownSymbol);
  CHECK(error_of([&] { (void)parse_formula("R(c)", &sig); }) == ErrorKind::kParseError);
}

TEST_CASE("parameters, sugar and literals") {
  const Formula f = parse_formula("exists x. x < #1");
  CHECK(max_parameter(f) == 1);
  CHECK(f.child(0).kind() == Formula::Kind::kRelation);
  CHECK(f.child(0).name() == "<");
  CHECK(parse_formula("x != y") == Formula::negation(parse_formula("x = y")));
  CHECK(parse_formula("true").kind() == Formula::Kind::kTrue);
  CHECK(parse_formula("exists x, y. !(x=y)") == parse_formula("exists x. exists y. !(x = y)"));
}

TEST_CASE("printing respects precedence") {
  for (const char* text : {"P(x) & Q(x) | R(x)", "P(x) -> Q(x) -> R(x)", "(P(x) -> Q(x)) -> R(x)",
                           "!(x = y) & exists z. P(z)", "!(x < y)", "P(x) & (Q(x) | R(x))"}) {
    const Formula f = parse_formula(text);
    CHECK(parse_formula(to_string(f)) == f);
  }
  CHECK(to_string(parse_formula("(P(x) & Q(x)) & R(x)")) == "P(x) & Q(x) & R(x)");
}

TEST_CASE("round trip on random formulas") {
  Signature sig({{"R", 2}, {"P", 1}, {"<", 2}}, {{"f", 1}, {"g", 2}}, {"c", "d"});
  Rng g(5);
  for (int i = 0; i < 1000; ++i) {
    const Formula f = random_formula(g, sig, 4, 2);
    const std::string text = to_string(f);
    REQUIRE_MESSAGE(parse_formula(text) == f, text);
    REQUIRE(parse_formula(text, &sig) == f);
  }
}

TEST_CASE("formula utilities") {
  CHECK(free_vars(parse_formula("R(x,y)")) == std::set<std::string>{"x", "y"});
  const Formula bound = parse_formula("exists x. R(x,y)");
  CHECK(substitute(bound, "x", Term::parameter(3)) == bound);
  CHECK(substitute(bound, "y", Term::parameter(3)) == parse_formula("exists x. R(x,#3)"));
  CHECK(error_of([&] { (void)substitute(bound, "y", Term::variable("x")); }) == ErrorKind::kCaptureError);
  const std::vector<Formula> parts = {parse_formula("P(x)"), parse_formula("Q(x)")};
  CHECK(to_string(conjunction_of(parts)) == "P(x) & Q(x)");
  CHECK(conjunction_of({}).kind() == Formula::Kind::kTrue);
}

TEST_CASE("quantifier rank laws") {
  Signature sig({{"R", 2}}, {}, {"c"});
  Rng g(9);
  for (int i = 0; i < 300; ++i) {
    const Formula a = random_formula(g, sig, 3, 1);
    const Formula b = random_formula(g, sig, 3, 1);
    CHECK(quantifier_rank(Formula::negation(a)) == quantifier_rank(a));
    CHECK(quantifier_rank(Formula::conjunction(a, b)) == std::max(quantifier_rank(a), quantifier_rank(b)));
    CHECK(quantifier_rank(Formula::exists("x", a)) == quantifier_rank(a) + 1);
  }
}

TEST_CASE("sequential substitution of parameters equals simultaneous substitution") {
  Signature sig({{"R", 2}}, {}, {});
  Rng g(21);
  const std::vector<std::string> vars = {"x", "y"};
  for (int i = 0; i < 300; ++i) {
    const Formula f = random_formula(g, sig, 3, 0, vars);
    const Formula seq = substitute(substitute(f, "x", Term::parameter(0)), "y", Term::parameter(1));
    const std::vector<std::pair<std::string, Term>> both = {{"x", Term::parameter(0)}, {"y", Term::parameter(1)}};
    CHECK(seq == substitute_all(f, both));
  }
}

TEST_CASE("enumeration counts match the independent count") {
  // Frozen from tests/oracles/enumeration_count.py.
  Signature unary({{"P", 1}}, {}, {});
  EnumerationCaps caps;
  caps.max_size = 5;
  const std::vector<std::string> x = {"x"};
  CHECK(enumerate_formulas(unary, 1, x, 0, caps).size() == 101);
  Signature binary({{"R", 2}}, {}, {});
  caps.max_size = 3;
  const std::vector<std::string> xy = {"x", "y"};
  const auto fs = enumerate_formulas(binary, 0, xy, 0, caps);
  CHECK(fs.size() == 40);
  bool has_atom = false, has_eq = false;
  for (const Formula& f : fs) {
    has_atom = has_atom || to_string(f) == "R(x,y)";
    has_eq = has_eq || to_string(f) == "x = y";
  }
  CHECK(has_atom);
  CHECK(has_eq);
}

TEST_CASE("enumeration edge cases") {
  Signature empty;
  CHECK(enumerate_formulas(empty, 0, {}, 0).empty());
  Signature unary({{"P", 1}}, {}, {});
  const std::vector<std::string> x = {"x"};
  const auto fs = enumerate_formulas(unary, 1, x, 0);
  std::set<std::string> printed;
  for (const Formula& f : fs) {
    CHECK(quantifier_rank(f) <= 1);
    CHECK(formula_size(f) <= 4);
    printed.insert(to_string(f));
  }
  CHECK(printed.size() == fs.size());
  CHECK(enumerate_formulas(unary, 1, x, 0) == fs);
  CHECK(error_of([&] { (void)enumerate_formulas(unary, 3, x, 0); }) == ErrorKind::kCapExceeded);
  EnumerationCaps tiny;
  tiny.max_count = 3;
  CHECK(error_of([&] { (void)enumerate_formulas(unary, 1, x, 0, tiny); }) == ErrorKind::kCapExceeded);
}

}  // TEST_SUITE
