#include <random>

#include <benchmark/benchmark.h>

#include "fractrace/branch.hpp"
#include "fractrace/dynamics.hpp"
#include "fractrace/frame.hpp"
#include "fractrace/trace.hpp"
#include "fractrace/transport.hpp"

namespace fractrace {
namespace {

DiscreteMeasure RandomMeasure(std::mt19937_64& rng, int count, int dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiscreteMeasure mu;
  std::vector<double> w(count);
  double total = 0.0;
  for (double& x : w) total += (x = 0.05 + u(rng));
  for (double x : w) {
    const Coord c{u(rng), dim == 2 ? u(rng) : 0.0};
    mu.Add(Point(c), x / total);
  }
  return mu;
}

void BM_HutchinsonTent(benchmark::State& state) {
  const SystemPtr tent = BuiltinSystem("tent");
  for (auto _ : state) {
    benchmark::DoNotOptimize(EstimateHutchinson(*tent, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_HutchinsonTent)->Arg(10)->Arg(14)->Arg(18);

void BM_HutchinsonSierpinski(benchmark::State& state) {
  const SystemPtr s = BuiltinSystem("sierpinski");
  for (auto _ : state) {
    benchmark::DoNotOptimize(EstimateHutchinson(*s, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_HutchinsonSierpinski)->Arg(6)->Arg(9);

void BM_W1OneDim(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const DiscreteMeasure mu = RandomMeasure(rng, n, 1), nu = RandomMeasure(rng, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(W1OneDim(mu, nu));
}
BENCHMARK(BM_W1OneDim)->Arg(100)->Arg(10000);

void BM_W1Flow(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const DiscreteMeasure mu = RandomMeasure(rng, n, 2), nu = RandomMeasure(rng, n, 2);
  TransportOptions options;
  options.force_flow = true;
  for (auto _ : state) benchmark::DoNotOptimize(W1Flow(mu, nu, options));
}
BENCHMARK(BM_W1Flow)->Arg(8)->Arg(32)->Arg(64);

void BM_Orbit(benchmark::State& state) {
  const SystemPtr s = BuiltinSystem("sierpinski");
  const BranchData branch = ComputeBranchData(*s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Orbit(*s, branch.branch_set[0], static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Orbit)->Arg(4)->Arg(7);

void BM_BranchData(benchmark::State& state) {
  const SystemPtr s = BuiltinSystem("sierpinski");
  for (auto _ : state) benchmark::DoNotOptimize(ComputeBranchData(*s));
}
BENCHMARK(BM_BranchData);

void BM_DecomposeTent(benchmark::State& state) {
  const SystemPtr tent = BuiltinSystem("tent");
  const BranchData branch = ComputeBranchData(*tent);
  const HutchinsonEstimate mu_h = GenericHutchinson(*tent, 12);
  TraceCoefficients tc;
  tc.discrete = {{branch.branch_set[0], 0, 0.1}, {branch.branch_set[0], 3, 0.02}};
  tc.c_inf = 0.5;
  const LevelMeasures lm = SynthesizeTrace(*tent, tc, 4, mu_h);
  for (auto _ : state) benchmark::DoNotOptimize(DecomposeTrace(*tent, branch, lm, mu_h));
}
BENCHMARK(BM_DecomposeTent);

void BM_FrameBuild(benchmark::State& state) {
  const SystemPtr tent = BuiltinSystem("tent");
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildTruncatedFrame(tent, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_FrameBuild)->Arg(1)->Arg(2);

}  // namespace
}  // namespace fractrace

BENCHMARK_MAIN();
