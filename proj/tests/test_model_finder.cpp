#include "bvm/generators.hpp"
#include "bvm/model_finder.hpp"
#include "doctest.h"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace bvm;
using bvm::test::error_of;

namespace {

Signature order_sig() { return Signature({{"<", 2}}, {}, {}); }

Theory strict_order() {
  return {parse_formula("forall x. !(x < x)"),
          parse_formula("forall x, y, z. (x < y & y < z) -> x < z")};
}

}  // namespace

TEST_SUITE("model_finder") {

TEST_CASE("eval_ordinary examples") {
  const Structure m = linear_order(2);
  Assignment a;
  a.params = {0, 1};
  CHECK(eval_ordinary(m, parse_formula("exists x. x < #1"), a));
  CHECK_FALSE(eval_ordinary(m, parse_formula("exists x. x < #0"), a));
  CHECK(eval_ordinary(m, parse_formula("forall x. x = x")));
  CHECK_FALSE(eval_ordinary(linear_order(1), parse_formula("exists x, y. !(x=y)")));
  CHECK(error_of([&] { (void)eval_ordinary(m, parse_formula("x < y")); }) == ErrorKind::kUnboundVariable);
  CHECK(error_of([&] { (void)eval_ordinary(m, parse_formula("#2 < #0"), a); }) == ErrorKind::kUnboundVariable);
  Assignment named;
  named.variables = {{"x", 0}, {"y", 1}};
  CHECK(eval_ordinary(m, parse_formula("x < y"), named));
}

TEST_CASE("finder examples") {
  FinderTask task;
  task.signature = order_sig();
  task.axioms = strict_order();
  task.positive = {parse_formula("exists x, y. !(x=y)")};
  task.bound = 2;
  const auto r = find_model(task);
  REQUIRE(r.status == FinderStatus::kFound);
  CHECK(r.model->size() == 2);
  // Lexicographically least: the empty order.
  CHECK(r.model->relation_table(0) == std::vector<std::uint8_t>{0, 0, 0, 0});

  task.bound = 1;
  CHECK(find_model(task).status == FinderStatus::kNone);

  FinderTask absurd;
  absurd.positive = {parse_formula("exists x. !(x=x)")};
  for (int n = 1; n <= 4; ++n) {
    absurd.bound = n;
    CHECK(find_model(absurd).status == FinderStatus::kNone);
  }
}

TEST_CASE("budget exhaustion is unknown, not none") {
  FinderTask task;
  task.signature = Signature({{"R", 2}}, {}, {});
  // Kleene evaluation cannot refute this before relation entries are fixed.
  task.positive = {parse_formula("exists x. R(x,x) & !R(x,x)")};
  task.bound = 3;
  task.node_budget = 5;
  CHECK(find_model(task).status == FinderStatus::kUnknown);
  task.node_budget = 1000000;
  CHECK(find_model(task).status == FinderStatus::kNone);
  task.node_budget = 5;
  CHECK(find_model(task).status == FinderStatus::kUnknown);
}

TEST_CASE("parameters and negative constraints") {
  FinderTask task;
  task.signature = order_sig();
  task.axioms = strict_order();
  task.params = 2;
  task.positive = {parse_formula("#0 < #1")};
  task.negative = {parse_formula("exists x. #0 < x & x < #1")};
  task.bound = 3;
  const auto r = find_model(task);
  REQUIRE(r.status == FinderStatus::kFound);
  CHECK(satisfies_task(task, *r.model, r.params));
  CHECK(error_of([&] {
          FinderTask bad = task;
          bad.positive = {parse_formula("#2 < #0")};
          (void)find_model(bad);
        }) == ErrorKind::kForeignParameter);
  CHECK(error_of([&] {
          FinderTask bad = task;
          bad.positive = {parse_formula("x < #0")};
          (void)find_model(bad);
        }) == ErrorKind::kUnboundVariable);
}

TEST_CASE("agrees with brute force, including the returned model") {
  const std::vector<Signature> sigs = {
      Signature({{"R", 2}}, {}, {}),         Signature({{"P", 1}}, {}, {"c"}),
      Signature({}, {{"f", 1}}, {}),         Signature({{"R", 2}}, {}, {"c"}),
      Signature({{"P", 1}}, {{"f", 1}}, {}), Signature({}, {{"f", 1}}, {"c"}),
  };
  Rng g(17);
  int found = 0, none = 0;
  for (int trial = 0; trial < 180; ++trial) {
    const Signature& sig = sigs[static_cast<std::size_t>(trial) % sigs.size()];
    FinderTask task;
    task.signature = sig;
    task.params = draw(g, 2);
    task.bound = 1 + draw(g, 3);
    const int pos = 1 + draw(g, 2);
    for (int i = 0; i < pos; ++i) task.positive.push_back(random_formula(g, sig, 3, task.params));
    if (coin(g)) task.negative.push_back(random_formula(g, sig, 3, task.params));
    const auto fast = find_model(task);
    const auto slow = oracle::brute_force_find(task);
    REQUIRE(fast.status != FinderStatus::kUnknown);
    REQUIRE((fast.status == FinderStatus::kFound) == slow.has_value());
    if (slow) {
      ++found;
      CHECK(*fast.model == slow->structure);
      CHECK(fast.params == slow->params);
    } else {
      ++none;
    }
  }
  CHECK(found > 20);
  CHECK(none > 5);
}

TEST_CASE("solvable at N implies solvable at N+1") {
  const Signature sig({{"R", 2}}, {}, {"c"});
  Rng g(23);
  for (int trial = 0; trial < 60; ++trial) {
    FinderTask task;
    task.signature = sig;
    task.positive = {random_formula(g, sig, 3, 0)};
    task.bound = 2;
    const auto small = find_model(task);
    task.bound = 3;
    const auto big = find_model(task);
    if (small.status == FinderStatus::kFound) {
      REQUIRE(big.status == FinderStatus::kFound);
      CHECK(*big.model == *small.model);
    }
  }
}

}  // TEST_SUITE
