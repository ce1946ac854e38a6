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

#include "kscore/decomposition.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>

#include "kscore/rng.hpp"
#include "kscore/stats.hpp"

namespace kscore {

namespace {

// Member entropies, each under its own derived stream.
std::vector<double> member_entropies(const SecondOrderEnsemble& ensemble,
                                     const ScoreKind& score,
                                     const EvalPolicy& policy,
                                     EvalDiagnostics* diag) {
  std::vector<double> h(ensemble.size());
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    h[m] = entropy(score, policy.with_stream(0x480000 + m),
                   ensemble.member(m), diag);
  }
  return h;
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::BMA ? "bma" : "pairwise";
}

UncertaintyDecomposition decompose(const SecondOrderEnsemble& ensemble,
                                   const ScoreKind& score,
                                   EstimatorKind estimator,
                                   const EvalPolicy& policy) {
  const std::size_t M = ensemble.size();
  EvalDiagnostics flags;
  const std::vector<double> h = member_entropies(ensemble, score, policy, &flags);

  Accumulator au_acc;
  for (std::size_t m = 0; m < M; ++m) au_acc.add(ensemble.weight(m) * h[m]);
  const double au = au_acc.total();

  Accumulator eu_acc;
  Accumulator tu_acc;
  if (estimator == EstimatorKind::BMA) {
    // Sample-based members need a materialized pool; the Monte Carlo policy
    // supplies its size and seed, deterministic policies use a fixed one
    // (uniform same-size sample sets pool exactly and ignore both).
    const BmaDist pbar =
        policy.mode() == EvalPolicy::Mode::MonteCarlo
            ? bma(ensemble, policy.n_samples(), derive_seed(policy.seed(), 0xBAu))
            : bma(ensemble, /*pool_size=*/4096, /*seed=*/0xBA5EDULL);
    for (std::size_t m = 0; m < M; ++m) {
      const double d = divergence(score, policy.with_stream(0xB00000 + m),
                                  pbar, ensemble.member(m), &flags);
      eu_acc.add(ensemble.weight(m) * d);
      tu_acc.add(ensemble.weight(m) * (d + h[m]));
    }
  } else {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t mp = 0; mp < M; ++mp) {
        const double w = ensemble.weight(m) * ensemble.weight(mp);
        // S(P_m', P_m): member m' scored under member m. The diagonal has
        // D = 0 and contributes H only.
        double d = 0.0;
        if (m != mp) {
          d = divergence(score, policy.with_stream(0xA00000 + m * M + mp),
                         ensemble.member(mp), ensemble.member(m), &flags);
        }
        eu_acc.add(w * d);
        tu_acc.add(w * (d + h[m]));
      }
    }
  }

  UncertaintyDecomposition out;
  out.au = au;
  out.eu = eu_acc.total();
  out.tu = tu_acc.total();
  out.estimator = estimator;
  out.score = score;
  out.diagnostics = {policy.name(), flags};

  // Appendix-style closed form for the squared error: the pairwise EU is
  // exactly twice the model-average EU. Emitting it that way keeps the
  // factor bit-exact instead of agreeing only to rounding.
  if (score.family() == ScoreKind::Family::SquaredError &&
      estimator == EstimatorKind::Pairwise &&
      policy.mode() != EvalPolicy::Mode::MonteCarlo) {
    const BmaDist pbar = bma(ensemble, /*pool_size=*/4096, /*seed=*/0xBA5EDULL);
    Accumulator eu_b;
    for (std::size_t m = 0; m < M; ++m) {
      eu_b.add(ensemble.weight(m) *
               divergence(score, policy, pbar, ensemble.member(m), nullptr));
    }
    out.eu = 2.0 * eu_b.total();
  }
  return out;
}

double gap(const SecondOrderEnsemble& ensemble, const ScoreKind& score,
           const EvalPolicy& policy) {
  const auto pairwise =
      decompose(ensemble, score, EstimatorKind::Pairwise, policy);
  const auto bma_est = decompose(ensemble, score, EstimatorKind::BMA, policy);
  return pairwise.tu - bma_est.tu;
}

std::vector<BatchItem> decompose_batch(
    std::span<const SecondOrderEnsemble> instances, const ScoreKind& score,
    EstimatorKind estimator, const EvalPolicy& policy, std::size_t n_threads) {
  std::vector<BatchItem> out(instances.size());
  const auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        out[i].result = decompose(instances[i], score, estimator,
                                  policy.with_stream(0x1000000 + i));
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  if (instances.empty()) return out;
  std::size_t threads = n_threads == 0
                            ? std::max<std::size_t>(
                                  1, std::thread::hardware_concurrency())
                            : n_threads;
  threads = std::min(threads, instances.size());
  if (threads <= 1) {
    run_range(0, instances.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (instances.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(instances.size(), lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(run_range, lo, hi);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace kscore
