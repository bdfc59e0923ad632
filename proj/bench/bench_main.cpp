// Serial vs parallel timings for the OpenMP kernels. Arg 0 is serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "bvm/bvalued.hpp"
#include "bvm/generators.hpp"
#include "bvm/suite.hpp"
#include "bvm/transfer.hpp"

namespace {

using namespace bvm;

Execution execution_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

// Blocks {a : a mod blocks == b, shifted by offset} partition P(atoms).
std::vector<Element> striped_partition(const BoolAlg& alg, int blocks, int offset) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(blocks));
  for (int a = 0; a < alg.atom_count(); ++a) members[static_cast<std::size_t>((a + offset) % blocks)].push_back(a);
  std::vector<Element> out;
  for (const auto& m : members) out.push_back(alg.element(m));
  return out;
}

GoodPairState wide_state() {
  GoodPairState s;
  s.source = BoolAlg(10);
  s.target = BoolAlg(3);
  s.designated = {s.source.element({0, 1, 2, 3}), s.source.element({2, 5, 7})};
  s.designated_image = {s.target.element({0}), s.target.element({1, 2})};
  s.reserve = {striped_partition(s.source, 4, 0), striped_partition(s.source, 3, 1), striped_partition(s.source, 4, 2)};
  s.filter = PrincipalFilter(s.source.element({0, 2, 4, 6, 8, 9}));
  return s;
}

void BM_IsPregood(benchmark::State& state) {
  const GoodPairState s = wide_state();
  for (auto _ : state) benchmark::DoNotOptimize(is_pregood(s, execution_of(state)));
}
BENCHMARK(BM_IsPregood)->Arg(0)->Arg(1);

void BM_FullnessCheck(benchmark::State& state) {
  Rng g(9);
  const BValuedStructure m = random_bundle(g, BoolAlg(3), Signature({{"R", 2}}, {}, {"c"}), 3, 6);
  CheckOptions opts;
  opts.execution = execution_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(fullness_check(m, 2, opts).full);
}
BENCHMARK(BM_FullnessCheck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DualEvaluationSuite(benchmark::State& state) {
  suite::Config config;
  config.atoms = 2;
  config.execution = execution_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(suite::run_criterion(1, config).checks);
}
BENCHMARK(BM_DualEvaluationSuite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
