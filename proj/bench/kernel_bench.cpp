// OpenMP kernels against their serial references, plus one factored-storage
// apply for scale.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "seacgd/kernels.hpp"
#include "seacgd/objective.hpp"
#include "seacgd/partition.hpp"
#include "seacgd/storage.hpp"

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

void BM_DotOmp(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto a = random_vector(n, 1), b = random_vector(n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(seacgd::kernels::dot(a, b));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * n * 16));
}

void BM_DotSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto a = random_vector(n, 1), b = random_vector(n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(seacgd::kernels::serial::dot(a, b));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * n * 16));
}

void BM_ApplyOmp(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto u = random_vector(n, 3), y = random_vector(n, 4);
  for (auto _ : st) {
    benchmark::DoNotOptimize(seacgd::kernels::add_and_squared_norm(u, y));
    seacgd::kernels::scale(0.5, y);
  }
}

void BM_ApplySerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto u = random_vector(n, 3), y = random_vector(n, 4);
  for (auto _ : st) {
    benchmark::DoNotOptimize(seacgd::kernels::serial::add_and_squared_norm(u, y));
    seacgd::kernels::serial::scale(0.5, y);
  }
}

void BM_SumOmp(benchmark::State& st) {
  auto a = random_vector(static_cast<std::size_t>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(seacgd::kernels::sum(a));
}

void BM_SumSerial(benchmark::State& st) {
  auto a = random_vector(static_cast<std::size_t>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(seacgd::kernels::serial::sum(a));
}

void BM_StorageApply(benchmark::State& st) {
  const auto d = static_cast<std::size_t>(st.range(0));
  const bool factored = st.range(1) != 0;
  seacgd::QuarticSaddle f(d);
  auto part = seacgd::partition_blocks(d, 8);
  auto x0 = f.point_at(1.2, -0.9);
  auto s = seacgd::make_storage(f, part, x0, factored ? seacgd::StorageKind::Factored : seacgd::StorageKind::Dense);
  std::vector<double> snap, upd;
  std::size_t b = 0;
  for (auto _ : st) {
    s->snapshot(snap);
    s->compute_update(snap, b, 1e-6, upd);
    benchmark::DoNotOptimize(s->apply(b, upd));
    b = (b + 1) % 8;
  }
}

}  // namespace

BENCHMARK(BM_DotOmp)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_DotSerial)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_ApplyOmp)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_ApplySerial)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_SumOmp)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_SumSerial)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_StorageApply)->Args({1 << 16, 0})->Args({1 << 16, 1})->Args({1 << 20, 1});

BENCHMARK_MAIN();
