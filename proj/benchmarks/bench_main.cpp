// Copyright 2026 The Coreaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include "coreaug/coreset.hpp"
#include "coreaug/linalg.hpp"
#include "coreaug/model.hpp"
#include "coreaug/rng.hpp"

namespace {

using namespace coreaug;

Matrix gaussian(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(Stream::kMonteCarlo, {seed});
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = gaussian(2 * n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(svd(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_SpectralNorm(benchmark::State& state) {
  const Matrix a = gaussian(256, 128, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm(a));
}
BENCHMARK(BM_SpectralNorm);

template <GreedyResult (*Engine)(const Matrix&, const GreedyParams&)>
void BM_Greedy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix d = pairwise_distances(gaussian(n, 8, 3));
  GreedyParams p;
  p.k = n / 10;
  p.sample = static_cast<std::size_t>(std::ceil(10.0 * std::log(100.0)));
  std::size_t evals = 0;
  for (auto _ : state) {
    const GreedyResult r = Engine(d, p);
    evals = r.evaluations;
    benchmark::DoNotOptimize(r.selected.data());
  }
  state.counters["evaluations"] = static_cast<double>(evals);
}
BENCHMARK(BM_Greedy<greedy_select>)->Name("BM_GreedyNaive")->Arg(200)->Arg(500)->Arg(1000);
BENCHMARK(BM_Greedy<lazy_greedy_select>)->Name("BM_GreedyLazy")->Arg(200)->Arg(500)->Arg(1000);
BENCHMARK(BM_Greedy<stochastic_greedy_select>)->Name("BM_GreedyStochastic")->Arg(200)->Arg(500)->Arg(1000);

void BM_PairwiseDistances(benchmark::State& state) {
  const Matrix p = gaussian(static_cast<std::size_t>(state.range(0)), 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_distances(p));
}
BENCHMARK(BM_PairwiseDistances)->Arg(500)->Arg(1000);

void BM_Jacobian(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  Matrix x = gaussian(64, 10, 5);
  for (double& v : x.data()) v = 0.5 + 0.1 * v;
  const Mlp net = Mlp::random({10, width, 3}, Activation::kTanh, 5);
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(net, x));
}
BENCHMARK(BM_Jacobian)->Arg(16)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
