#include <benchmark/benchmark.h>
#include <flatpar/attention.hpp>
#include <flatpar/multigrid.hpp>
#include <flatpar/nbody.hpp>
#include <flatpar/quickhull.hpp>

using namespace flatpar;
using namespace flatpar::nbody;
using namespace flatpar::mg;
using namespace flatpar::qh;
using namespace flatpar::attn;

static void BM_NBodyStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto sys = random_system(n, 7);
  SimParams params;
  params.steps = 1;
  for (auto _ : state) {
    auto out = simulate(sys, params);
    benchmark::DoNotOptimize(out.pos_x.values().data());
  }
}
BENCHMARK(BM_NBodyStep)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_MgRelax(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  auto g = random_grid(side, 11);
  MgOperators ops;
  const Weights4 w = ops.weights_S;
  for (auto _ : state) {
    auto out = relax_grid(g, w);
    benchmark::DoNotOptimize(out.values.values().data());
  }
}
BENCHMARK(BM_MgRelax)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Quickhull(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto pts = gen_disk(n, 13);
  for (auto _ : state) {
    auto h = hull(pts);
    benchmark::DoNotOptimize(h.values().data());
  }
}
BENCHMARK(BM_Quickhull)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

static void BM_FlashAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto p = random_problem(n, 64, 17);
  TileConfig cfg;
  for (auto _ : state) {
    auto out = flash_attention(p, cfg);
    benchmark::DoNotOptimize(out.a.data());
  }
}
BENCHMARK(BM_FlashAttention)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
