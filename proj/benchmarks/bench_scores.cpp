// Copyright 2026 The kscore Authors
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

#include "kscore/decomposition.hpp"
#include "kscore/distributions.hpp"
#include "kscore/scores.hpp"

namespace {

using namespace kscore;

SecondOrderEnsemble make_ensemble(std::size_t members) {
  std::vector<FirstOrderDist> ms;
  for (std::size_t m = 0; m < members; ++m) {
    ms.push_back(FirstOrderDist::gaussian(0.1 * static_cast<double>(m),
                                          0.5 + 0.05 * static_cast<double>(m)));
  }
  return SecondOrderEnsemble(std::move(ms));
}

void BM_ClosedFormDivergence(benchmark::State& state) {
  const auto p = FirstOrderDist::gaussian(0.0, 1.0);
  const auto q = FirstOrderDist::gaussian(0.7, 2.0);
  const auto policy = EvalPolicy::closed_form();
  const std::vector<ScoreKind> kinds = {
      ScoreKind::squared_error(), ScoreKind::crps(),
      ScoreKind::gaussian_kernel(1.0), ScoreKind::log_score()};
  const auto& kind = kinds[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state) {
    benchmark::DoNotOptimize(divergence(kind, policy, p, q));
  }
}
BENCHMARK(BM_ClosedFormDivergence)->DenseRange(0, 3);

void BM_McDivergence(benchmark::State& state) {
  const auto p = FirstOrderDist::gaussian(0.0, 1.0);
  const auto q = FirstOrderDist::gaussian(0.7, 2.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_divergence(ScoreKind::crps(), p, q, n, 42));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_McDivergence)->Range(1 << 10, 1 << 16)->Complexity();

void BM_DecomposePairwise(benchmark::State& state) {
  const auto ens = make_ensemble(static_cast<std::size_t>(state.range(0)));
  const auto policy = EvalPolicy::closed_form();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        decompose(ens, ScoreKind::crps(), EstimatorKind::Pairwise, policy));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecomposePairwise)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_DecomposeBma(benchmark::State& state) {
  const auto ens = make_ensemble(static_cast<std::size_t>(state.range(0)));
  const auto policy = EvalPolicy::closed_form();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        decompose(ens, ScoreKind::crps(), EstimatorKind::BMA, policy));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecomposeBma)->RangeMultiplier(2)->Range(4, 64)->Complexity();

}  // namespace

BENCHMARK_MAIN();
