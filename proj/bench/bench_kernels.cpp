// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "hgsp/graph_learning.hpp"
#include "hgsp/pipeline.hpp"
#include "hgsp/topology.hpp"

namespace {

using namespace hgsp;

Signal noise_signal(Index channels, Index samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  RowMatrix m(channels, samples);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return Signal(std::move(m), 400.0);
}

SpatialGraph random_graph(Index n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(p);
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) a(i, j) = a(j, i) = edge(rng) ? 1.0 : 0.0;
  }
  return SpatialGraph{a, std::nullopt, true};
}

template <auto Fn>
void BM_learn_weights(benchmark::State& state) {
  const auto x = noise_signal(state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 3, kDefaultDenseTensorCap));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) * state.range(1) * 4);
}

template <auto Fn>
void BM_topology(benchmark::State& state) {
  const auto g = random_graph(state.range(0), 0.1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(g));
}

template <auto Fn>
void BM_extract_batch(benchmark::State& state) {
  std::vector<Signal> samples;
  for (Index n = 0; n < state.range(0); ++n) samples.push_back(noise_signal(8, 400, 100 + n));
  const PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(samples, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_learn_weights<learn_weights_serial>)->Name("learn_weights/serial")->Args({8, 20000})->Args({32, 2000});
BENCHMARK(BM_learn_weights<learn_weights>)->Name("learn_weights/parallel")->Args({8, 20000})->Args({32, 2000});
BENCHMARK(BM_topology<topology_embedding_serial>)->Name("topology/serial")->Arg(100)->Arg(400);
BENCHMARK(BM_topology<topology_embedding>)->Name("topology/parallel")->Arg(100)->Arg(400);
BENCHMARK(BM_extract_batch<extract_batch_serial>)->Name("extract_batch/serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_extract_batch<extract_batch>)->Name("extract_batch/parallel")->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
