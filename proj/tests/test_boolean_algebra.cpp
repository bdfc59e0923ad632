#include <random>

#include "bvm/boolean_algebra.hpp"
#include "doctest.h"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace bvm;
using bvm::test::error_of;

TEST_SUITE("boolean_algebra") {

TEST_CASE("lattice operations on P(3)") {
  BoolAlg b(3);
  CHECK(meet(b.element({0, 1}), b.element({1, 2})) == b.element({1}));
  CHECK(complement(b.element({0})) == b.element({1, 2}));
  CHECK(big_join(b, {}) == b.zero());
  CHECK(big_meet(b, {}) == b.one());
  CHECK(leq(b.element({1}), b.element({0, 1})));
  CHECK_FALSE(leq(b.element({2}), b.element({0, 1})));
  CHECK(error_of([&] { (void)meet(b.one(), BoolAlg(2).one()); }) == ErrorKind::kMixedAlgebras);
}

TEST_CASE("algebra identity is the atom count") {
  CHECK(BoolAlg(2, {"p", "q"}) == BoolAlg(2));
  CHECK_FALSE(BoolAlg(2) == BoolAlg(3));
}

TEST_CASE("Boolean algebra laws on random triples") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + static_cast<int>(g() % 8);
    BoolAlg b(n);
    auto pick = [&] { return b.element(g() & b.full_mask()); };
    const Element x = pick(), y = pick(), z = pick();
    REQUIRE(((x & y) & z) == (x & (y & z)));
    REQUIRE(((x | y) | z) == (x | (y | z)));
    REQUIRE((x & (y | z)) == ((x & y) | (x & z)));
    REQUIRE((x | (y & z)) == ((x | y) & (x | z)));
    REQUIRE(~(x & y) == (~x | ~y));
    REQUIRE(~(x | y) == (~x & ~y));
    REQUIRE(~~x == x);
    REQUIRE((x & ~x) == b.zero());
    REQUIRE((x | ~x) == b.one());
  }
}

TEST_CASE("decides") {
  BoolAlg b(3);
  CHECK(decides(b.element({0}), b.element({0, 1})));
  CHECK_FALSE(decides(b.element({0, 1}), b.element({1, 2})));
  for (int a = 0; a < 3; ++a) {
    for (const Element& x : b.all_elements()) CHECK(decides(b.atom(a), x));
  }
  CHECK(error_of([&] { (void)decides(b.zero(), b.one()); }) == ErrorKind::kZeroElement);
}

TEST_CASE("decides agrees with atom-wise membership") {
  BoolAlg b(4);
  for (const Element& c : b.all_elements()) {
    if (c.is_zero()) continue;
    for (const Element& x : b.all_elements()) {
      bool uniform = true;
      for (int i : c.atoms()) uniform = uniform && (x.contains_atom(i) == x.contains_atom(c.first_atom()));
      CHECK(decides(c, x) == uniform);
    }
  }
}

TEST_CASE("antichain checks") {
  BoolAlg b(3);
  const std::vector<Element> two = {b.element({0}), b.element({1})};
  auto s = antichain_checks(two);
  CHECK(s.is_antichain);
  CHECK_FALSE(s.is_maximal);
  const std::vector<Element> atoms = {b.atom(0), b.atom(1), b.atom(2)};
  s = antichain_checks(atoms);
  CHECK(s.is_antichain);
  CHECK(s.is_maximal);
  const std::vector<Element> overlap = {b.element({0, 1}), b.element({1, 2})};
  CHECK_FALSE(antichain_checks(overlap).is_antichain);
  const std::vector<Element> with_zero = {b.zero(), b.one()};
  CHECK_FALSE(antichain_checks(with_zero).is_antichain);
}

TEST_CASE("chain condition matches exhaustive antichain search") {
  CHECK(chain_condition(BoolAlg(1)) == 2);
  for (int n = 1; n <= 4; ++n) {
    CHECK(chain_condition(BoolAlg(n)) == oracle::max_antichain_size(n) + 1);
  }
}

TEST_CASE("independent families") {
  CHECK(independent_family_check({}));
  BoolAlg b(4);
  const std::vector<std::vector<Element>> coords = {{b.element({0, 1}), b.element({2, 3})},
                                                    {b.element({0, 2}), b.element({1, 3})}};
  CHECK(independent_family_check(coords));
  const std::vector<std::vector<Element>> twice = {coords[0], coords[0]};
  CHECK_FALSE(independent_family_check(twice));
  const std::vector<std::vector<Element>> partial = {{b.element({0, 1})}};
  CHECK(error_of([&] { (void)independent_family_check(partial); }) == ErrorKind::kNotMaximal);
}

TEST_CASE("make_independent_family") {
  auto f = make_independent_family(0, 3);
  CHECK(f.algebra.atom_count() == 1);
  CHECK(f.antichains.empty());
  f = make_independent_family(1, 3);
  CHECK(f.algebra.atom_count() == 3);
  REQUIRE(f.antichains.size() == 1);
  CHECK(f.antichains[0] == std::vector<Element>{f.algebra.atom(0), f.algebra.atom(1), f.algebra.atom(2)});
  f = make_independent_family(2, 2);
  CHECK(f.algebra.atom_count() == 4);
  for (int m = 0; m <= 3; ++m) {
    for (int d = 1; d <= 3; ++d) {
      const auto fam = make_independent_family(m, d, kMaxAtoms);
      CHECK(independent_family_check(fam.antichains));
      for (const auto& c : fam.antichains) CHECK(antichain_checks(c).is_maximal);
    }
  }
  CHECK(error_of([] { (void)make_independent_family(3, 3, 16); }) == ErrorKind::kSizeOverflow);
}

TEST_CASE("principal filters") {
  BoolAlg b(3);
  const std::vector<Element> gens = {b.element({0, 1}), b.element({1, 2})};
  const auto f = PrincipalFilter::from_generators(b, gens);
  CHECK(f.generator() == b.element({1}));
  CHECK(f.is_ultrafilter());
  CHECK(f.ultrafilter_atom() == 1);
  const std::vector<Element> bad = {b.element({0}), b.element({1})};
  CHECK(error_of([&] { (void)PrincipalFilter::from_generators(b, bad); }) == ErrorKind::kNoFIP);
  const auto t = PrincipalFilter::trivial(b);
  CHECK(t.generator() == b.one());
  CHECK_FALSE(t.is_ultrafilter());
  CHECK(PrincipalFilter::trivial(BoolAlg(1)).is_ultrafilter());
  CHECK(error_of([&] { (void)t.ultrafilter_atom(); }) == ErrorKind::kNotUltrafilter);
  CHECK(f.members().size() == 4);
  for (const Element& x : f.members()) CHECK(f.contains(x));
}

TEST_CASE("quotients") {
  BoolAlg b(3);
  Quotient q(PrincipalFilter(b.element({0, 1})));
  CHECK(q.target().atom_count() == 2);
  CHECK(q.project(b.element({0, 2})) == q.target().element({0}));
  CHECK(q.equal_mod(b.element({0, 2}), b.element({0})));
  Quotient id(PrincipalFilter::trivial(b));
  for (const Element& x : b.all_elements()) CHECK(id.project(x) == x);
}

TEST_CASE("quotient projection is a surjective homomorphism with kernel D") {
  BoolAlg b(4);
  for (const Element& d : b.all_elements()) {
    if (d.is_zero()) continue;
    PrincipalFilter filter(d);
    Quotient q(filter);
    std::set<AtomMask> hit;
    for (const Element& x : b.all_elements()) {
      hit.insert(q.project(x).mask());
      CHECK(q.project(~x) == ~q.project(x));
      CHECK(q.project(x).is_one() == filter.contains(x));
      CHECK(q.project(q.lift(q.project(x))) == q.project(x));
      for (const Element& y : b.all_elements()) {
        REQUIRE(q.project(x & y) == (q.project(x) & q.project(y)));
        REQUIRE(q.project(x | y) == (q.project(x) | q.project(y)));
        REQUIRE(q.equal_mod(x, y) == (q.project(x) == q.project(y)));
      }
    }
    CHECK(hit.size() == (std::size_t{1} << q.target().atom_count()));
  }
}

TEST_CASE("holds mod D") {
  BoolAlg b(3);
  Quotient q(PrincipalFilter(b.element({0, 1})));
  const std::vector<Element> args = {b.element({0, 2}), b.element({0})};
  CHECK(q.holds_mod([](std::span<const Element> v) { return v[0] == v[1]; }, args));
  CHECK(q.leq_mod(b.element({0, 2}), b.element({0})));
  CHECK_FALSE(q.nonzero_mod(b.element({2})));
}

TEST_CASE("regular sequence from an antichain") {
  BoolAlg b(3);
  IndexedAntichain c{2, {{0b01, b.atom(0)}, {0b10, b.atom(1)}, {0b11, b.atom(2)}}};
  auto seq = regular_sequence_from_antichain(c, 2);
  CHECK(seq.members == std::vector<Element>{b.element({0, 2}), b.element({1, 2})});
  CHECK(seq.report.degree == 2);
  CHECK(seq.report.fip_up_to == 2);
  CHECK(seq.report.degree_bound_holds);
  CHECK(seq.report.deciding_dense);

  BoolAlg one(1);
  auto single = regular_sequence_from_antichain({1, {{0b1, one.one()}}}, 1);
  CHECK(single.members == std::vector<Element>{one.one()});

  BoolAlg two(2);
  auto pair = regular_sequence_from_antichain({2, {{0b01, two.atom(0)}, {0b10, two.atom(1)}}}, 1);
  CHECK(pair.report.fip_up_to == 1);

  IndexedAntichain missing{2, {{0b01, b.atom(0)}, {0b10, b.atom(1)}}};
  CHECK(error_of([&] { (void)regular_sequence_from_antichain(missing, 2); }) == ErrorKind::kBadIndexing);
}

TEST_CASE("regular sequence properties over all index sizes") {
  for (int size = 1; size <= 3; ++size) {
    for (int k = 1; k <= 2; ++k) {
      IndexedAntichain c{size, {}};
      int atoms = 0;
      for (Subset s = 1; s < (Subset{1} << size); ++s) {
        if (subset_size(s) <= k) ++atoms;
      }
      BoolAlg b(atoms);
      int next = 0;
      for (Subset s = 1; s < (Subset{1} << size); ++s) {
        if (subset_size(s) <= k) c.members.emplace(s, b.atom(next++));
      }
      const auto seq = regular_sequence_from_antichain(c, k);
      CHECK(seq.report.fip_up_to >= std::min(k, size));
      CHECK(seq.report.degree_bound_holds);
      CHECK(seq.report.deciding_dense);
      for (const auto& [s, cs] : c.members) {
        Element m = b.one();
        for (int i : subset_members(s)) m = m & seq.members[static_cast<std::size_t>(i)];
        CHECK(leq(cs, m));
      }
      for (int a = 0; a < atoms; ++a) {
        int under = 0;
        for (const Element& x : seq.members) under += x.contains_atom(a) ? 1 : 0;
        CHECK(under <= k);
      }
    }
  }
}

}  // TEST_SUITE
