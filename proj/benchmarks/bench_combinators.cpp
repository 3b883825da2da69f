#include <benchmark/benchmark.h>
#include <flatpar/combinators.hpp>

#include <random>

using namespace flatpar;

namespace {

ParArray<double> rand_doubles(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> dist{-1.0, 1.0};
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return ParArray<double>{std::move(v)};
}

}  // namespace

static void BM_Reduce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto xs = rand_doubles(n, 1);
  const auto m = sum_monoid<double>();
  for (auto _ : state) {
    double r = reduce(xs, m);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Reduce)->Arg(1 << 16)->Arg(1 << 20)->Arg(1 << 24);

static void BM_Scan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto xs = rand_doubles(n, 2);
  const auto m = sum_monoid<double>();
  for (auto _ : state) {
    auto r = scan(xs, m, ScanMode::inclusive);
    benchmark::DoNotOptimize(r.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Scan)->Arg(1 << 16)->Arg(1 << 20)->Arg(1 << 24);

static void BM_ReduceByIndex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t buckets = 1024;
  std::mt19937_64 rng{3};
  std::vector<std::int64_t> is(n);
  for (auto& i : is) i = static_cast<std::int64_t>(rng() % buckets);
  ParArray<std::int64_t> idx{std::move(is)};
  const auto xs = rand_doubles(n, 4);
  const auto m = sum_monoid<double>();
  for (auto _ : state) {
    auto r = reduce_by_index(ParArray<double>{std::vector<double>(buckets, 0.0)}, m, idx, xs);
    benchmark::DoNotOptimize(r.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_ReduceByIndex)->Arg(1 << 16)->Arg(1 << 20);
