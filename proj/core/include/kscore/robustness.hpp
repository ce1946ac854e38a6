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

#ifndef KSCORE_ROBUSTNESS_HPP
#define KSCORE_ROBUSTNESS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kscore/decomposition.hpp"
#include "kscore/distributions.hpp"
#include "kscore/scores.hpp"

namespace kscore {

/// Influence of a point contamination on aleatoric uncertainty: the
/// derivative of AU((1-eps) Q + eps delta_contaminant) at eps = 0, which is
/// H(contaminant) - AU(Q). Bounded kernels keep this bounded no matter how
/// wild the contaminant; that is the robustness story in one line.
double influence(const SecondOrderEnsemble& base,
                 const FirstOrderDist& contaminant, const ScoreKind& score,
                 const EvalPolicy& policy);

/// Influence values along a family of Gaussian contaminants
/// N(center, sigma0^2) over a variance grid.
struct InfluencePath {
  FirstOrderDist contaminant;  // the final (largest-variance) contaminant
  ScoreKind score;
  double if_value = 0.0;       // influence of `contaminant`
  std::vector<std::pair<double, double>> sweep;  // (sigma0^2, influence)
};

InfluencePath influence_sweep(const SecondOrderEnsemble& base,
                              std::span<const double> center,
                              std::span<const double> sigma0_sq_grid,
                              const ScoreKind& score, const EvalPolicy& policy);

enum class GrowthClass { Log, Sqrt, Linear, Bounded };

std::string to_string(GrowthClass c);

/// How the entropy of N(0, sigma0^2) grows with the contamination variance.
struct GrowthFit {
  /// Least-squares slope of log H against log sigma0^2.
  double slope = 0.0;
  /// Least-squares slope of H against log sigma0^2 (natural log); separates
  /// logarithmic growth, where H itself is linear in log sigma0^2.
  double semilog_slope = 0.0;
  GrowthClass classification = GrowthClass::Bounded;
  /// H at the largest grid variance.
  double terminal_entropy = 0.0;
  std::vector<double> sigma0_sq;
  std::vector<double> entropies;
};

/// Fits the growth of H(N(0, sigma0^2)) over a variance grid spanning at
/// least four decades and classifies it as linear (squared error), square
/// root (energy), logarithmic (log score), or bounded (Gaussian kernel).
/// Throws std::domain_error("degenerate grid") otherwise.
GrowthFit growth_fit(const ScoreKind& score,
                     std::span<const double> sigma0_sq_grid);

/// Mean absolute percentage error 100/n * sum |(distorted - base) / base|.
/// Throws std::domain_error("MAPE undefined") on a zero base entry.
double mape(std::span<const double> base, std::span<const double> distorted);

/// Distortion experiment: for each delta, every instance gets one appended
/// contaminant member modeled on its first member with the mean shifted by a
/// N(0, delta^2) draw and the variance inflated by delta^2 (a synthetic
/// stand-in for a model trained on noisier targets). Reported per
/// (score, delta): the MAPE of aleatoric uncertainty against the base
/// instances.
struct DistortionResult {
  std::vector<ScoreKind> kinds;
  std::vector<double> deltas;
  Matrix mape_table;  // kinds x deltas
};

DistortionResult distortion_experiment(
    std::span<const SecondOrderEnsemble> base, std::span<const double> deltas,
    std::span<const ScoreKind> kinds, std::uint64_t seed,
    const EvalPolicy& policy = EvalPolicy::closed_form());

/// Seeded synthetic Gaussian ensembles (univariate, uniform weights) used by
/// the distortion experiment and the robustness CLI when no input file is
/// given: member means scatter around a per-instance center, member
/// variances jitter around a per-instance base level.
std::vector<SecondOrderEnsemble> synthetic_gaussian_instances(
    std::size_t n_instances, std::size_t members, std::uint64_t seed);

}  // namespace kscore

#endif  // KSCORE_ROBUSTNESS_HPP
