#include <algorithm>
#include <numeric>

#include "bvm/generators.hpp"
#include "bvm/transfer.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bvm;
using bvm::test::error_of;
using bvm::test::uniform;

namespace {

Distribution table(const BoolAlg& alg, int m, std::vector<Element> values) {
  return Distribution{alg, m, std::move(values)};
}

// g(0) = 0, g(1) = 2.
AlgebraHom p3_to_p2() { return hom_from_atom_map(BoolAlg(3), BoolAlg(2), {0, 2}); }

AlgebraHom random_hom(Rng& g, int source_atoms, int target_atoms) {
  std::vector<int> points(static_cast<std::size_t>(source_atoms));
  std::iota(points.begin(), points.end(), 0);
  std::shuffle(points.begin(), points.end(), g);
  points.resize(static_cast<std::size_t>(target_atoms));
  return hom_from_atom_map(BoolAlg(source_atoms), BoolAlg(target_atoms), points);
}

// Random partition of the atoms into nonempty blocks.
std::vector<Element> random_partition(Rng& g, const BoolAlg& alg) {
  const int blocks = uniform(g, 1, alg.atom_count());
  std::vector<AtomMask> masks(static_cast<std::size_t>(blocks), 0);
  for (int x = 0; x < alg.atom_count(); ++x) {
    const int b = x < blocks ? x : draw(g, blocks);
    masks[static_cast<std::size_t>(b)] |= AtomMask{1} << x;
  }
  std::vector<Element> out;
  for (AtomMask m : masks) out.push_back(alg.element(m));
  return out;
}

GoodPairState random_state(Rng& g) {
  GoodPairState s;
  s.source = BoolAlg(uniform(g, 1, 4));
  s.target = BoolAlg(uniform(g, 1, 3));
  const int k = uniform(g, 0, 2);
  for (int a = 0; a < k; ++a) {
    s.designated.push_back(random_element(g, s.source));
    s.designated_image.push_back(random_element(g, s.target));
  }
  const int r = uniform(g, 0, 2);
  for (int i = 0; i < r; ++i) s.reserve.push_back(random_partition(g, s.source));
  s.filter = PrincipalFilter(random_element(g, s.source, true));
  return s;
}

bool zero_mod(const Element& a, const PrincipalFilter& filter) { return (a & filter.generator()).is_zero(); }

}  // namespace

TEST_SUITE("transfer") {

TEST_CASE("homomorphisms from atom maps") {
  const AlgebraHom j = p3_to_p2();
  const BoolAlg& p3 = j.source();
  CHECK(j(p3.element({0, 1})) == j.target().element({0}));
  CHECK(j(p3.element({1})) == j.target().zero());
  CHECK(j.kernel().generator() == p3.element({0, 2}));
  CHECK(j.minimal_preimage(j.target().one()) == p3.element({0, 2}));

  const AlgebraHom id = hom_from_atom_map(BoolAlg(3), BoolAlg(3), {0, 1, 2});
  for (const Element& a : id.source().all_elements()) CHECK(id(a) == a);
  CHECK(id.kernel().generator().is_one());

  CHECK(error_of([] { (void)hom_from_atom_map(BoolAlg(3), BoolAlg(2), {0, 0}); }) == ErrorKind::kNotInjective);
  CHECK_FALSE(hom_from_atom_map(BoolAlg(3), BoolAlg(2), {0, 0}, false).is_surjective());
  CHECK(error_of([] { (void)hom_from_atom_map(BoolAlg(3), BoolAlg(2), {0, 3}); }) == ErrorKind::kInvalidTuple);
  CHECK(error_of([] { (void)hom_from_atom_map(BoolAlg(3), BoolAlg(2), {0}); }) == ErrorKind::kInvalidTuple);

  const PrincipalFilter u1 = PrincipalFilter::ultrafilter(j.target(), 1);
  CHECK(preimage_filter(j, u1) == PrincipalFilter::ultrafilter(p3, 2));
}

TEST_CASE("kernel and quotient") {
  auto g = bvm::test::rng(11);
  for (int round = 0; round < 40; ++round) {
    const int n = uniform(g, 1, 5);
    const AlgebraHom j = random_hom(g, n, uniform(g, 1, n));
    const Quotient q(j.kernel());
    CHECK(q.target().atom_count() == j.target().atom_count());
    const auto all = j.source().all_elements();
    for (const Element& a : all) {
      CHECK(j.kernel().contains(a) == j(a).is_one());
      for (const Element& b : all) CHECK(q.equal_mod(a, b) == (j(a) == j(b)));
    }
    // The induced map from the quotient is onto.
    std::vector<AtomMask> images;
    for (const Element& a : all) images.push_back(j(a).mask());
    std::sort(images.begin(), images.end());
    images.erase(std::unique(images.begin(), images.end()), images.end());
    CHECK(images.size() == (std::size_t{1} << j.target().atom_count()));
  }
}

TEST_CASE("pushforward") {
  const AlgebraHom j = p3_to_p2();
  const BoolAlg& p3 = j.source();
  const BoolAlg& p2 = j.target();
  const auto a0 = table(p3, 2, {p3.one(), p3.element({0, 1}), p3.element({0, 2}), p3.element({0})});
  const auto a1 = pushforward(j, a0);
  CHECK(a1 == table(p2, 2, {p2.one(), p2.element({0}), p2.one(), p2.element({0})}));
  CHECK(is_distribution(a1));

  const auto ones = Distribution::constant(p3, 2, p3.one());
  CHECK(pushforward(j, ones) == Distribution::constant(p2, 2, p2.one()));
  const AlgebraHom id = hom_from_atom_map(p3, p3, {0, 1, 2});
  CHECK(pushforward(id, a0) == a0);

  const auto hidden = table(p3, 1, {p3.one(), p3.element({1})});
  CHECK(error_of([&] { (void)pushforward(j, hidden); }) == ErrorKind::kZeroImage);
  const auto bad = table(p3, 1, {p3.one(), p3.zero()});
  CHECK(error_of([&] { (void)pushforward(j, bad); }) == ErrorKind::kPreconditionFailed);
  CHECK(error_of([&] { (void)pushforward(j, Distribution::constant(p2, 1, p2.one())); }) ==
        ErrorKind::kMixedAlgebras);
}

TEST_CASE("pullback of distributions") {
  const AlgebraHom j = p3_to_p2();
  const BoolAlg& p3 = j.source();
  const BoolAlg& p2 = j.target();

  const auto ones = pullback_distribution(j, Distribution::constant(p2, 2, p2.one()));
  for (const Element& v : ones.values) CHECK(j(v).is_one());

  const auto a1 = table(p2, 1, {p2.one(), p2.element({1})});
  const auto a0 = pullback_distribution(j, a1);
  CHECK(a0 == table(p3, 1, {p3.one(), p3.element({2})}));
  CHECK(pushforward(j, a0) == a1);

  // A preimage that is not monotone: the fix-up must cut it back.
  const auto a1b = table(p2, 2, {p2.one(), p2.element({1}), p2.one(), p2.element({1})});
  const auto pre = table(p3, 2, {p3.one(), p3.element({1, 2}), p3.element({0, 2}), p3.element({1, 2})});
  const auto fixed = pullback_distribution(j, a1b, pre);
  CHECK(is_distribution(fixed));
  CHECK(pushforward(j, fixed) == a1b);
  CHECK_FALSE(is_distribution(pre));

  const auto wrong = table(p3, 1, {p3.one(), p3.element({0})});
  CHECK(error_of([&] { (void)pullback_distribution(j, a1, wrong); }) == ErrorKind::kPreconditionFailed);
  const AlgebraHom fold = hom_from_atom_map(p3, p2, {0, 0}, false);
  CHECK(error_of([&] { (void)pullback_distribution(fold, a1); }) == ErrorKind::kNotSurjective);
}

TEST_CASE("pullback round trip on random draws") {
  auto g = bvm::test::rng(12);
  for (int round = 0; round < 1000; ++round) {
    const int n = uniform(g, 1, 5);
    const AlgebraHom j = random_hom(g, n, uniform(g, 1, n));
    const int m = uniform(g, 0, 3);
    const auto a1 = random_distribution(g, j.target(), m, random_element(g, j.target(), true));
    Distribution pre = a1;
    pre.algebra = j.source();
    for (Subset s = 0; s < a1.values.size(); ++s) {
      pre[s] = j.minimal_preimage(a1[s]) | (random_element(g, j.source()) & ~j.range());
    }
    const auto a0 = pullback_distribution(j, a1, pre);
    REQUIRE(is_distribution(a0));
    CHECK(pushforward(j, a0) == a1);
    CHECK(pushforward(j, pullback_distribution(j, a1)) == a1);
  }
}

TEST_CASE("pulling back multiplicative refinements") {
  // P(4) -> P(2) with g(0) = 1, g(1) = 3; U1 at atom 0 pulls back to U0 at atom 1.
  const AlgebraHom j = hom_from_atom_map(BoolAlg(4), BoolAlg(2), {1, 3});
  const BoolAlg& p4 = j.source();
  const BoolAlg& p2 = j.target();
  const PrincipalFilter u1 = PrincipalFilter::ultrafilter(p2, 0);
  const PrincipalFilter u0 = preimage_filter(j, u1);
  CHECK(u0 == PrincipalFilter::ultrafilter(p4, 1));

  const auto a0 = table(p4, 2, {p4.one(), p4.element({0, 1, 3}), p4.element({1, 2, 3}), p4.element({1})});
  const auto a1 = pushforward(j, a0);
  CHECK(a1 == table(p2, 2, {p2.one(), p2.one(), p2.one(), p2.element({0})}));
  CHECK_FALSE(is_multiplicative(a1));
  const auto b1 = Distribution::constant(p2, 2, p2.element({0}));
  const auto b0 = pull_back_mult_refinement(j, a0, u0, b1, u1);
  CHECK(is_multiplicative(b0));
  CHECK(is_in_filter(b0, u0));
  CHECK(refines(b0, a0));

  const AlgebraHom id = hom_from_atom_map(p2, p2, {0, 1});
  const auto split = table(p2, 2, {p2.one(), p2.one(), p2.one(), p2.element({0})});
  CHECK(pull_back_mult_refinement(id, split, u1, b1, u1) == b1);

  CHECK(error_of([&] { (void)pull_back_mult_refinement(j, a0, PrincipalFilter::ultrafilter(p4, 0), b1, u1); }) ==
        ErrorKind::kPreconditionFailed);
  CHECK(error_of([&] { (void)pull_back_mult_refinement(j, a0, u0, Distribution::constant(p2, 2, p2.one()), u1); }) ==
        ErrorKind::kPreconditionFailed);
}

TEST_CASE("refinements transfer in both directions") {
  auto g = bvm::test::rng(13);
  for (int round = 0; round < 300; ++round) {
    const int n = uniform(g, 1, 4);
    const AlgebraHom j = random_hom(g, n, uniform(g, 1, std::min(n, 3)));
    const PrincipalFilter u1 = PrincipalFilter::ultrafilter(j.target(), draw(g, j.target().atom_count()));
    const PrincipalFilter u0 = preimage_filter(j, u1);
    const auto a0 = random_distribution(g, j.source(), uniform(g, 0, 2), u0.generator());
    const auto a1 = pushforward(j, a0);

    auto b1 = find_multiplicative_refinement(a1, u1, RefinementSearch::kNonConstant);
    if (!b1) b1 = find_multiplicative_refinement(a1, u1);
    REQUIRE(b1.has_value());
    const auto b0 = pull_back_mult_refinement(j, a0, u0, *b1, u1);
    CHECK(is_multiplicative_refinement(b0, a0, u0));

    auto c0 = find_multiplicative_refinement(a0, u0, RefinementSearch::kNonConstant);
    if (!c0) c0 = find_multiplicative_refinement(a0, u0);
    REQUIRE(c0.has_value());
    CHECK(is_multiplicative_refinement(pushforward(j, *c0), a1, u1));

    // The pushforward of a multiplicative table comes back refining A0.
    if (is_multiplicative(a1)) CHECK(is_multiplicative_refinement(pull_back_mult_refinement(j, a0, u0, a1, u1), a0, u0));
  }
}

TEST_CASE("Łoś maps across a homomorphism") {
  CriterionOptions collapse;
  collapse.theory = {parse_formula("forall x, y. x = y")};
  const FormulaSequence seq{Signature({}, {}, {}), {"x"}, {parse_formula("x = #0"), parse_formula("x = #1")}};
  const AlgebraHom j = p3_to_p2();
  const BoolAlg& p3 = j.source();

  const auto ones = Distribution::constant(p3, 2, p3.one());
  const AlgebraHom id = hom_from_atom_map(p3, p3, {0, 1, 2});
  const auto same = los_transfer_check(id, ones, seq, collapse);
  CHECK(same.decided);
  CHECK(same.agree);
  CHECK(same.source == Truth::kTrue);

  // Both singletons hold everywhere but the pair only at atom 2.
  const auto split = table(p3, 2, {p3.one(), p3.one(), p3.one(), p3.element({2})});
  const auto r = los_transfer_check(j, split, seq, collapse);
  CHECK(r.source == Truth::kFalse);
  CHECK(r.target == Truth::kFalse);
  CHECK(r.agree);
  CHECK_FALSE(r.transfer_defect);
  REQUIRE(r.source_counterexample.has_value());
  CHECK(*r.source_counterexample == p3.element({0, 1}));
  REQUIRE(r.target_counterexample.has_value());
  CHECK(*r.target_counterexample == j.target().element({0}));

  // Failure hidden at atom 1, which j sends to 0.
  const auto hidden = table(p3, 2, {p3.one(), p3.one(), p3.one(), p3.element({0, 2})});
  const auto d = los_transfer_check(j, hidden, seq, collapse);
  CHECK(d.source == Truth::kFalse);
  CHECK(d.target == Truth::kTrue);
  CHECK(d.transfer_defect);
  CHECK_FALSE(d.target_counterexample.has_value());
}

TEST_CASE("Σ terms") {
  BoolAlg p3(3);
  const std::vector<Element> c{p3.element({0, 1}), p3.element({1, 2})};
  CHECK(eval_sigma(0b0010, c, p3) == p3.element({0}));
  CHECK(eval_sigma(0b1000, c, p3) == p3.element({1}));
  CHECK(eval_sigma(0b1010, c, p3) == c[0]);
  CHECK(eval_sigma(0b1111, c, p3).is_one());
  CHECK(eval_sigma(0, c, p3).is_zero());
  CHECK(eval_sigma(1, {}, p3).is_one());

  GoodPairState s;
  s.source = p3;
  s.target = BoolAlg(2);
  s.designated = {p3.element({0})};
  s.designated_image = {s.target.one()};
  s.filter = PrincipalFilter::trivial(p3);
  // Only the positive minterm is live at c′ = 1.
  CHECK(sigma_one(s) == std::vector<SigmaTerm>{0b10, 0b11});
  CHECK(sigma_plus(s) == std::vector<SigmaTerm>{0b10, 0b11});
}

TEST_CASE("pre-good pairs") {
  GoodPairState empty;
  CHECK(is_pregood(empty));
  CHECK(is_pregood_literal(empty));

  // Three independent coin antichains; the third carries the designated pair.
  const IndependentFamily fam = make_independent_family(3, 2);
  GoodPairState s;
  s.source = fam.algebra;
  s.target = BoolAlg(2);
  s.designated = {fam.antichains[2][0]};
  s.designated_image = {s.target.element({0})};
  s.reserve = {fam.antichains[0], fam.antichains[1]};
  s.filter = PrincipalFilter::trivial(s.source);
  CHECK(is_pregood(s, Execution::kSerial));
  CHECK(is_pregood(s, Execution::kParallel));
  CHECK(is_pregood_literal(s));

  GoodPairState overlap = s;
  overlap.reserve.push_back(fam.antichains[2]);
  CHECK_FALSE(is_pregood(overlap));
  CHECK_FALSE(is_pregood_literal(overlap));

  GoodPairState narrow = s;
  narrow.filter = PrincipalFilter(fam.antichains[2][0]);
  CHECK_FALSE(is_pregood(narrow));

  GoodPairState bad = s;
  bad.reserve.push_back({fam.antichains[0][0]});
  CHECK(error_of([&] { (void)is_pregood(bad); }) == ErrorKind::kNotMaximal);
  bad = s;
  bad.designated_image.clear();
  CHECK(error_of([&] { (void)is_pregood(bad); }) == ErrorKind::kPreconditionFailed);
}

TEST_CASE("reduced pre-good check matches the definition") {
  auto g = bvm::test::rng(14);
  int positives = 0;
  for (int round = 0; round < 400; ++round) {
    const GoodPairState s = random_state(g);
    const bool literal = is_pregood_literal(s);
    CHECK(is_pregood(s, Execution::kSerial) == literal);
    CHECK(is_pregood(s, Execution::kParallel) == literal);
    positives += literal ? 1 : 0;
  }
  CHECK(positives > 20);
  CHECK(positives < 380);
}

TEST_CASE("extension to a good pair") {
  auto g = bvm::test::rng(15);
  int extended = 0;
  for (int round = 0; round < 300; ++round) {
    const GoodPairState s = random_state(g);
    if (!is_pregood(s)) {
      CHECK(error_of([&] { (void)extend_to_good(s); }) == ErrorKind::kNotPregood);
      continue;
    }
    const GoodPairState t = extend_to_good(s);
    CHECK(is_pregood(t));
    CHECK(leq(t.filter.generator(), s.filter.generator()));
    extended += t.filter.generator() != s.filter.generator() ? 1 : 0;
    // Maximal: every strictly larger filter breaks pre-goodness.
    const Element gen = t.filter.generator();
    for (const Element& smaller : t.source.all_elements()) {
      if (smaller.is_zero() || smaller == gen || !leq(smaller, gen)) continue;
      GoodPairState u = t;
      u.filter = PrincipalFilter(smaller);
      CHECK_FALSE(is_pregood_literal(u));
    }
  }
  CHECK(extended > 0);
}

TEST_CASE("witnesses") {
  const IndependentFamily fam = make_independent_family(2, 2);
  GoodPairState s;
  s.source = fam.algebra;
  s.target = BoolAlg(1);
  s.designated = {fam.antichains[1][0], s.source.one()};
  s.designated_image = {s.target.zero(), s.target.one()};
  s.reserve = {fam.antichains[0]};
  s.filter = PrincipalFilter::trivial(s.source);

  const auto top = find_witness(s, s.source.one());
  REQUIRE(top.has_value());
  CHECK(top->choice.empty());
  CHECK(top->designated == 1);
  CHECK_FALSE(find_witness(s, s.source.zero()).has_value());

  // a = the first member of antichain 0: only the choice picking it works.
  const auto w = find_witness(s, fam.antichains[0][0]);
  REQUIRE(w.has_value());
  CHECK(w->choice == Choice{{0, 0}});
  CHECK(w->designated == 1);
}

TEST_CASE("witness soundness on random states") {
  auto g = bvm::test::rng(16);
  int found = 0;
  for (int round = 0; round < 500; ++round) {
    const GoodPairState s = random_state(g);
    const Element a = random_element(g, s.source);
    const auto w = find_witness(s, a);
    if (zero_mod(a, s.filter)) {
      CHECK_FALSE(w.has_value());
      continue;
    }
    if (!w) continue;
    ++found;
    const auto alpha = static_cast<std::size_t>(w->designated);
    CHECK_FALSE(s.designated_image.at(alpha).is_zero());
    CHECK(zero_mod(choice_meet(s, w->choice) & s.designated[alpha] & ~a, s.filter));
  }
  CHECK(found > 20);
}

TEST_CASE("refinement step") {
  BoolAlg p8(8);
  IndexedAntichain d{2, {}};
  for (Subset t = 0; t < 4; ++t) d.members.emplace(t, p8.atom(static_cast<int>(t)));
  const auto ones = Distribution::constant(p8, 2, p8.one());
  const PrincipalFilter trivial = PrincipalFilter::trivial(p8);
  const RefinementStep r = refinement_step(trivial, d, ones);
  CHECK(r.refinement[0b01] == p8.element({1, 3}));
  CHECK(r.refinement[0b10] == p8.element({2, 3}));
  CHECK(r.refinement[0b11] == p8.element({3}));
  CHECK(r.refinement[0].is_one());
  CHECK(r.filter.generator() == p8.element({3}));

  const IndexedAntichain nothing{0, {{Subset{0}, p8.element({5})}}};
  const auto unit = refinement_step(trivial, nothing, Distribution::constant(p8, 0, p8.one()));
  CHECK(unit.refinement == Distribution::constant(p8, 0, p8.one()));
  CHECK(unit.filter == trivial);

  IndexedAntichain missing = d;
  missing.members.erase(Subset{0});
  CHECK(error_of([&] { (void)refinement_step(trivial, missing, ones); }) == ErrorKind::kBadIndexing);
  IndexedAntichain overlapping = d;
  overlapping.members[Subset{0}] = p8.element({0, 1});
  CHECK(error_of([&] { (void)refinement_step(trivial, overlapping, ones); }) == ErrorKind::kNotAntichain);
  const auto low = table(p8, 2, {p8.one(), p8.element({0}), p8.one(), p8.element({0})});
  CHECK(error_of([&] { (void)refinement_step(PrincipalFilter::ultrafilter(p8, 1), d, low); }) ==
        ErrorKind::kNotInFilter);
  CHECK(error_of([&] { (void)refinement_step(PrincipalFilter::ultrafilter(p8, 0), d, ones); }) ==
        ErrorKind::kNoFIP);
}

TEST_CASE("refinement step on random draws") {
  auto g = bvm::test::rng(17);
  int stepped = 0;
  for (int round = 0; round < 1000; ++round) {
    const int m = uniform(g, 0, 2);
    const int keys = 1 << m;
    const BoolAlg alg(uniform(g, keys, 8));
    // Distinct labels for the first `keys` atoms keep every d_t nonzero.
    std::vector<AtomMask> masks(static_cast<std::size_t>(keys), 0);
    for (int x = 0; x < alg.atom_count(); ++x) {
      const int label = x < keys ? x : draw(g, keys + 1) - 1;
      if (label >= 0) masks[static_cast<std::size_t>(label)] |= AtomMask{1} << x;
    }
    IndexedAntichain d{m, {}};
    for (Subset t = 0; t < static_cast<Subset>(keys); ++t) d.members.emplace(t, alg.element(masks[t]));
    const PrincipalFilter e(random_element(g, alg, true));
    const auto a = random_distribution(g, alg, m, e.generator());
    const Subset full = full_subset(m);
    // B(∅) = 1, so only a nonempty I can lose the FIP.
    if (m > 0 && zero_mod(a[full] & d.members.at(full), e)) {
      CHECK(error_of([&] { (void)refinement_step(e, d, a); }) == ErrorKind::kNoFIP);
      continue;
    }
    ++stepped;
    const RefinementStep r = refinement_step(e, d, a);
    CHECK(is_multiplicative(r.refinement));
    // An atom below every B({i}), i ∈ s, sits in one d_t; each B({i}) forces i ∈ t.
    for (int x = 0; x < alg.atom_count(); ++x) {
      const auto where = std::find_if(d.members.begin(), d.members.end(),
                                      [&](const auto& kv) { return kv.second.contains_atom(x); });
      for (Subset s = 1; s <= full; ++s) {
        bool below = true;
        for (int i : subset_members(s)) below = below && r.refinement[Subset{1} << i].contains_atom(x);
        if (!below) continue;
        REQUIRE(where != d.members.end());
        CHECK(is_subset(s, where->first));
        CHECK(r.refinement[s].contains_atom(x));
      }
    }
    for (Subset s = 1; s <= full; ++s) CHECK(leq(r.refinement[s], a[s]));
    CHECK(leq(r.filter.generator(), e.generator()));
    CHECK_FALSE(r.filter.generator().is_zero());
  }
  CHECK(stepped > 500);
}

}  // TEST_SUITE
