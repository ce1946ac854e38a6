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

#ifndef KSCORE_KERNELS_HPP
#define KSCORE_KERNELS_HPP

#include <optional>
#include <span>
#include <string>

#include "kscore/distributions.hpp"
#include "kscore/matrix.hpp"

namespace kscore {

/// Negative definite kernels usable in kernel scores, with the metadata the
/// score layer relies on (boundedness, translation invariance, homogeneity).
///
/// Families:
///   SquaredEuclidean  k(x,y) = ||x-y||^2          (the beta = 2 endpoint)
///   Power(beta)       k(x,y) = ||x-y||^beta,  beta in (0,2)
///   Gaussian(gamma)   k(x,y) = 1 - exp(-||x-y||^2 / gamma^2)
///
/// The Gaussian family stores the exponential with a +1 offset so the kernel
/// is nonnegative with k(x,x) = 0, like the other families. Score
/// divergences and entropies are invariant to that constant offset.
class KernelSpec {
 public:
  enum class Family { SquaredEuclidean, Power, Gaussian };

  static KernelSpec squared_euclidean();
  /// beta in (0,2). Pass beta = 2 as squared_euclidean() instead; the
  /// boundary case is a different animal (it is not strictly proper).
  static KernelSpec power(double beta);
  static KernelSpec gaussian(double gamma);

  Family family() const { return family_; }
  double beta() const { return param_; }
  double gamma() const { return param_; }

  bool bounded() const { return family_ == Family::Gaussian; }
  bool translation_invariant() const { return true; }
  /// beta for Power, 2 for SquaredEuclidean, none for Gaussian.
  std::optional<double> homogeneous_degree() const;

  /// k(x, y). Throws on dimension mismatch.
  double eval(std::span<const double> x, std::span<const double> y) const;

  /// k as a function of the squared distance r2 = ||x-y||^2.
  double eval_r2(double r2) const;

  std::string name() const;

 private:
  KernelSpec(Family family, double param) : family_(family), param_(param) {}

  Family family_;
  double param_;
};

/// Median-heuristic bandwidth: the median of all n(n-1)/2 pairwise Euclidean
/// distances of `points`. Even pair counts take the lower median
/// (index (count-1)/2 of the sorted list) so the result is deterministic.
/// Throws std::domain_error("degenerate bandwidth") when the median distance
/// is zero (in particular when all points coincide).
double median_heuristic(const Matrix& points);

/// Reference point set for bandwidth selection over a collection of
/// ensembles: parametric members contribute their means, sample-based
/// members their samples.
Matrix bandwidth_reference_points(std::span<const SecondOrderEnsemble> ensembles);

/// Median-heuristic bandwidth over the pooled reference points of the given
/// ensembles, thinned to at most `max_points` rows (deterministic stride) to
/// keep the pairwise distance set manageable.
double resolve_median_gamma(std::span<const SecondOrderEnsemble> ensembles,
                            std::size_t max_points = 1024);

}  // namespace kscore

#endif  // KSCORE_KERNELS_HPP
