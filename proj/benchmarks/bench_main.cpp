#include <benchmark/benchmark.h>

#include "monolab/br_solver.hpp"
#include "monolab/fitzpatrick.hpp"
#include "monolab/harness.hpp"
#include "monolab/quasidensity.hpp"

using namespace monolab;

namespace {

ConvexFn elastic(int n) { return ConvexFn::sum(ConvexFn::norm(n, 1.0, NormTag::L1), ConvexFn::half_sq_norm(n)); }

void BM_ResolventNormalCone(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto S = MonotoneOperator::normal_cone(DualPair(n, NormTag::L2),
                                               CompactConvexSet::ball(Vec::Zero(n), 1.0, NormTag::L1));
  const Vec z = Vec::LinSpaced(n, -3.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(resolvent(*S, z));
}
BENCHMARK(BM_ResolventNormalCone)->Arg(2)->Arg(8)->Arg(32);

void BM_ResolventSum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DualPair E(n, NormTag::L2);
  const auto S = MonotoneOperator::sum(
      MonotoneOperator::subdifferential(E, ConvexFn::norm(n, 1.0, NormTag::L2)),
      MonotoneOperator::normal_cone(E, CompactConvexSet::box(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0))));
  const Vec z = Vec::LinSpaced(n, -3.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(resolvent(*S, z));
}
BENCHMARK(BM_ResolventSum)->Arg(2)->Arg(8);

void BM_GapEuclidean(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto S = MonotoneOperator::subdifferential(DualPair(n, NormTag::L2), elastic(n));
  const auto probes = default_probes(n, 16, 3);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gap(*S, probes[i++ % probes.size()]));
}
BENCHMARK(BM_GapEuclidean)->Arg(2)->Arg(8);

void BM_GapTail(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto T = tail_operator(n);
  const PairedPoint probe{Vec::Zero(n), Vec::Ones(n)};
  GapOptions opts;
  opts.starts = 2;
  for (auto _ : state) benchmark::DoNotOptimize(gap(*T, probe, opts));
}
BENCHMARK(BM_GapTail)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PhiFiniteGraph(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::vector<PairedPoint> pts;
  for (int k = 0; k < m; ++k) {
    const double t = 6.283185307179586 * k / m;
    const Vec x = (Vec(2) << std::cos(t), std::sin(t)).finished();
    pts.push_back({x, 2.0 * x});
  }
  const auto S = MonotoneOperator::finite_graph(DualPair(2, NormTag::L2), pts);
  const Vec x = (Vec(2) << 0.3, -0.2).finished();
  const Vec xs = (Vec(2) << 1.0, 0.5).finished();
  for (auto _ : state) benchmark::DoNotOptimize(phi(*S, x, xs));
}
BENCHMARK(BM_PhiFiniteGraph)->Arg(16)->Arg(256);

void BM_PhiSubdiff(benchmark::State& state) {
  const auto S = MonotoneOperator::subdifferential(DualPair(3, NormTag::L2), elastic(3));
  const Vec x = Vec::LinSpaced(3, -1.0, 1.0);
  const Vec xs = Vec::LinSpaced(3, 2.0, -0.5);
  for (auto _ : state) benchmark::DoNotOptimize(phi(*S, x, xs));
}
BENCHMARK(BM_PhiSubdiff)->Unit(benchmark::kMillisecond);

void BM_BrPoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ConvexFn h = elastic(n);
  const Vec u = Vec::Constant(n, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(br_point({h, u, 1.0, 0.5}));
}
BENCHMARK(BM_BrPoint)->Arg(2)->Arg(8);

void BM_QuasidenseWitness(benchmark::State& state) {
  const ConvexFn f = ConvexFn::norm(3, 1.0, NormTag::L2);
  const Vec x = Vec::Constant(3, 2.0);
  const Vec xs = Vec::Constant(3, -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(quasidense_witness(f, x, xs, 1e-6));
}
BENCHMARK(BM_QuasidenseWitness);

void BM_ScenarioSumTest(benchmark::State& state) {
  const std::string text = R"({"schema": 1, "space": {"dim": 1},
    "operators": {"abs": {"subdiff": {"norm": 1}}, "unit": {"normal_cone": {"interval": [-1, 1]}}},
    "tasks": [{"type": "sum_test", "seed": 1, "S": "abs", "T": "unit", "probes": 50}]})";
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario_text(text));
}
BENCHMARK(BM_ScenarioSumTest)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
