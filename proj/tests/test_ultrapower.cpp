#include "bvm/generators.hpp"
#include "bvm/ultrapower.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bvm;
using bvm::test::error_of;

TEST_SUITE("ultrapower") {

TEST_CASE("elements are canonical atom functions in lex order") {
  BoolAlg p2(2);
  const auto up = boolean_ultrapower(linear_order(3), p2);
  CHECK(up.structure.size() == 9);
  CHECK(up.function_of(0) == std::vector<int>{0, 0});
  CHECK(up.function_of(1) == std::vector<int>{0, 1});
  CHECK(up.function_of(5) == std::vector<int>{1, 2});
  for (int k = 0; k < 9; ++k) CHECK(up.index_of(up.function_of(k)) == k);
  CHECK(pre_los(up) == std::vector<int>{0, 4, 8});
}

TEST_CASE("size cap") {
  CHECK(error_of([] { (void)boolean_ultrapower(linear_order(2), BoolAlg(13)); }) == ErrorKind::kSizeOverflow);
  CHECK_NOTHROW((void)boolean_ultrapower(linear_order(2), BoolAlg(12)));
}

TEST_CASE("partitions and functions") {
  BoolAlg p3(3);
  const std::vector<int> f{2, 0, 2};
  const Partition p = partition_from_function(p3, 3, f);
  CHECK(p[0] == p3.element({1}));
  CHECK(p[1] == p3.zero());
  CHECK(p[2] == p3.element({0, 2}));
  CHECK(function_from_partition(p3, p) == f);
  CHECK(error_of([&] { (void)function_from_partition(p3, {p3.element({0}), p3.element({1})}); }) ==
        ErrorKind::kNotMaximal);
  CHECK(error_of([&] { (void)function_from_partition(p3, {p3.element({0, 1}), p3.element({1, 2})}); }) ==
        ErrorKind::kNotAntichain);
}

TEST_CASE("join-of-meets value equals the bundle value") {
  Rng g(11);
  const Signature sig({{"R", 2}}, {{"f", 1}}, {"c"});
  int checked = 0;
  for (int round = 0; round < 40; ++round) {
    const int size = 1 + static_cast<int>(draw(g, 3));
    const Structure base = random_structure(g, sig, size);
    const BoolAlg alg(1 + static_cast<int>(draw(g, 3)));
    const auto up = boolean_ultrapower(base, alg);
    const Formula phi = random_formula(g, sig, 2, 2);
    for (int trial = 0; trial < 4; ++trial) {
      const int a = static_cast<int>(draw(g, static_cast<std::uint64_t>(up.structure.size())));
      const int b = static_cast<int>(draw(g, static_cast<std::uint64_t>(up.structure.size())));
      const std::vector<Partition> args{partition_from_function(alg, size, up.function_of(a)),
                                        partition_from_function(alg, size, up.function_of(b))};
      Assignment asg;
      asg.params = {a, b};
      const Element bundle_value = eval_bv(up.structure, phi, asg);
      CHECK(ultrapower_value(base, alg, phi, args) == bundle_value);
      CHECK(eval_bv(up.structure, phi, asg, Engine::kCoordinatewise) == bundle_value);
      ++checked;
    }
  }
  CHECK(checked == 160);
}

TEST_CASE("dummy parameters do not change the value") {
  BoolAlg p2(2);
  const Structure base = linear_order(3);
  const Formula phi = parse_formula("exists x. #0 < x");
  const std::vector<int> f{0, 2};
  const std::vector<int> h{1, 1};
  const std::vector<Partition> one{partition_from_function(p2, 3, f)};
  const std::vector<Partition> two{one[0], partition_from_function(p2, 3, h)};
  CHECK(ultrapower_value(base, p2, phi, one) == ultrapower_value(base, p2, phi, two));
  CHECK(ultrapower_value(base, p2, phi, one) == p2.element({0}));
}

TEST_CASE("pre-Łoś embedding is elementary and values are 0 or 1") {
  BoolAlg p2(2);
  const Structure base = linear_order(3);
  const auto up = boolean_ultrapower(base, p2);
  const auto diag = diagonal(base, p2);
  const auto embed = pre_los(up);
  ElementMap map;
  for (int a = 0; a < base.size(); ++a) map.emplace_back(a, embed[static_cast<std::size_t>(a)]);
  CheckOptions opts;
  opts.max_size = 5;
  const auto report = check_elementary(map, diag, up.structure, 2, opts);
  CHECK(report.elementary);
  CHECK(report.injective);
  CHECK(report.formulas_checked > 0);
  Assignment asg;
  asg.params = {0, 1};
  const Element v = eval_bv(diag, parse_formula("#0 < #1"), asg);
  CHECK((v.is_zero() || v.is_one()));
}

TEST_CASE("inverse partitions") {
  BoolAlg p3(3);
  const InversePartition a{{p3.element({0, 1}), p3.element({2})}, {1, 0}};
  const InversePartition b{{p3.element({0}), p3.element({1}), p3.element({2})}, {1, 1, 0}};
  const InversePartition c{{p3.element({0}), p3.element({1, 2})}, {1, 0}};
  CHECK(function_from_inverse(p3, a) == std::vector<int>{1, 1, 0});
  CHECK(equivalent(p3, a, b));
  CHECK_FALSE(equivalent(p3, a, c));
  const InversePartition gap{{p3.element({0}), p3.element({1})}, {0, 1}};
  CHECK(error_of([&] { (void)function_from_inverse(p3, gap); }) == ErrorKind::kNotMaximal);

  const Structure base = linear_order(2);
  const Formula phi = parse_formula("#0 < #1");
  const std::vector<InversePartition> args{c, a};
  const std::vector<Partition> parts{partition_from_function(p3, 2, function_from_inverse(p3, c)),
                                     partition_from_function(p3, 2, function_from_inverse(p3, a))};
  // c = (1,0,0), a = (1,1,0): only atom 1 has 0 < 1.
  CHECK(inverse_partition_value(base, p3, phi, args) == p3.element({1}));
  CHECK(ultrapower_value(base, p3, phi, parts) == p3.element({1}));
}

TEST_CASE("Łoś check at every atom") {
  Rng g(5);
  const Signature sig({{"R", 2}}, {}, {"c"});
  for (int round = 0; round < 6; ++round) {
    const Structure base = random_structure(g, sig, 2 + static_cast<int>(draw(g, 2)));
    const BoolAlg alg(2);
    for (int e = 0; e < alg.atom_count(); ++e) {
      CheckOptions opts;
      opts.max_size = 4;
      const auto report = los_check(base, alg, PrincipalFilter::ultrafilter(alg, e), 2, opts);
      CHECK(report.elementary);
      CHECK(report.isomorphism_ok);
      CHECK(report.isomorphism.size() == static_cast<std::size_t>(base.size()));
    }
  }
  BoolAlg p2(2);
  CHECK(error_of([&] { (void)los_check(linear_order(2), p2, PrincipalFilter::trivial(p2), 1); }) ==
        ErrorKind::kNotUltrafilter);
}

TEST_CASE("the ultrapower is full") {
  Rng g(7);
  const Signature sig({{"R", 2}}, {}, {});
  for (int round = 0; round < 4; ++round) {
    const Structure base = random_structure(g, sig, 2 + draw(g, 2));
    const auto up = boolean_ultrapower(base, BoolAlg(2));
    CheckOptions opts;
    opts.params = 1;
    opts.max_size = 4;
    const auto report = fullness_check(up.structure, 2, opts);
    CHECK(report.full);
    CHECK(report.formulas_checked > 0);
  }
}

TEST_CASE("the two-element algebra gives back the base") {
  BoolAlg two(1);
  const Structure base = linear_order(3);
  const auto up = boolean_ultrapower(base, two);
  CHECK(up.structure.size() == base.size());
  CHECK(pre_los(up) == std::vector<int>{0, 1, 2});
  const auto report = los_check(base, two, PrincipalFilter::ultrafilter(two, 0), 2);
  CHECK(report.elementary);
  CHECK(report.isomorphism_ok);
  for (int a = 0; a < base.size(); ++a) {
    for (int b = 0; b < base.size(); ++b) {
      Assignment asg;
      asg.params = {a, b};
      CHECK(eval_bv(up.structure, parse_formula("#0 < #1"), asg).is_one() == (a < b));
    }
  }
}

TEST_CASE("constant inverse partition is the embedded element") {
  BoolAlg p3(3);
  const auto up = boolean_ultrapower(linear_order(3), p3);
  const auto embed = pre_los(up);
  for (int m = 0; m < 3; ++m) {
    const InversePartition constant{{p3.atom(0), p3.atom(1), p3.atom(2)}, {m, m, m}};
    const auto f = function_from_inverse(p3, constant);
    CHECK(up.index_of(f) == embed[static_cast<std::size_t>(m)]);
  }
}

}  // TEST_SUITE
