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

#ifndef KSCORE_DECOMPOSITION_HPP
#define KSCORE_DECOMPOSITION_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kscore/distributions.hpp"
#include "kscore/scores.hpp"

namespace kscore {

/// How TU and EU relate the members to each other.
///
///   BMA       score every member against the materialized model average;
///             O(M) score evaluations.
///   Pairwise  score every ordered member pair (diagonal included, matching
///             the expectation over two independent draws); O(M^2).
///
/// AU is the weighted member entropy under both.
enum class EstimatorKind { BMA, Pairwise };

std::string to_string(EstimatorKind kind);

struct DecompositionDiagnostics {
  std::string policy;
  EvalDiagnostics flags;
};

/// Additive split of predictive uncertainty: tu = eu + au (within 1e-10).
/// eu is nonnegative; au is nonnegative for kernel scores and may be
/// negative for the log score.
struct UncertaintyDecomposition {
  double tu = 0.0;
  double eu = 0.0;
  double au = 0.0;
  EstimatorKind estimator = EstimatorKind::Pairwise;
  ScoreKind score = ScoreKind::crps();
  DecompositionDiagnostics diagnostics;
};

/// Computes the decomposition of `ensemble` under `score`.
///
/// BMA:      AU = sum_m w_m H(P_m), EU = sum_m w_m D(Pbar, P_m),
///           TU = sum_m w_m S(Pbar, P_m).
/// Pairwise: AU identical, EU = sum_{m,m'} w_m w_m' D(P_m', P_m),
///           TU = sum_{m,m'} w_m w_m' S(P_m', P_m).
///
/// Monte Carlo policies are split into per-member (or per-pair) streams so
/// the result is reproducible and independent of evaluation order. For the
/// squared error the pairwise EU is emitted as exactly twice the BMA EU,
/// which is its closed form.
UncertaintyDecomposition decompose(const SecondOrderEnsemble& ensemble,
                                   const ScoreKind& score,
                                   EstimatorKind estimator,
                                   const EvalPolicy& policy);

/// Gap between the pairwise and model-average estimators,
/// delta = TU_P - TU_B = EU_P - EU_B; nonnegative (within rounding) for
/// every score family shipped here.
double gap(const SecondOrderEnsemble& ensemble, const ScoreKind& score,
           const EvalPolicy& policy);

/// One entry of a batch run: either a decomposition or the error that took
/// the instance down. The batch keeps going either way.
struct BatchItem {
  std::optional<UncertaintyDecomposition> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

/// Order-preserving batch decomposition with homogeneous settings. Instances
/// are independent; Monte Carlo policies get a per-instance stream. With
/// n_threads == 0 a hardware-sized pool is used; results do not depend on
/// the thread count.
std::vector<BatchItem> decompose_batch(
    std::span<const SecondOrderEnsemble> instances, const ScoreKind& score,
    EstimatorKind estimator, const EvalPolicy& policy,
    std::size_t n_threads = 1);

}  // namespace kscore

#endif  // KSCORE_DECOMPOSITION_HPP
