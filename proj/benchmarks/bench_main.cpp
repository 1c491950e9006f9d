// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <benchmark/benchmark.h>

#include "selflabel/clustering.hpp"
#include "selflabel/encoder.hpp"
#include "selflabel/ensemble.hpp"
#include "selflabel/rng.hpp"

namespace {

using namespace selflabel;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_KMeans(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const Matrix x = random_matrix(n, 16, 7);
  KMeansOptions opts;
  opts.restarts = 1;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(x, k, opts).wss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KMeans)->Args({1000, 50})->Args({6000, 200})->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<std::int64_t> cost(n * n);
  for (auto& c : cost) c = -static_cast<std::int64_t>(rng.below(1000));
  for (auto _ : state) benchmark::DoNotOptimize(hungarian_min_cost(cost, n));
}
BENCHMARK(BM_Hungarian)->Arg(50)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ContrastiveLoss(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const Matrix z = random_matrix(2 * m, 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(contrastive_loss(z, 0.1).loss);
}
BENCHMARK(BM_ContrastiveLoss)->Arg(64)->Arg(128)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
