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

#ifndef KSCORE_DISTRIBUTIONS_HPP
#define KSCORE_DISTRIBUTIONS_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "kscore/matrix.hpp"

namespace kscore {

/// Diagonal Gaussian: one mean and one variance per coordinate. A variance of
/// zero degenerates that coordinate to an atom.
struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> var;
};

/// A first-order predictive distribution over targets in R^d.
///
/// Variants: diagonal Gaussian, finite Gaussian mixture, point mass, and an
/// empirical sample set. All instances are immutable values after
/// construction and safe to share across threads.
///
/// A Gaussian whose variance vector is identically zero is normalized to a
/// PointMass at construction, so downstream code sees exactly one
/// representation of a degenerate distribution.
class FirstOrderDist {
 public:
  enum class Kind { Gaussian, Mixture, PointMass, Empirical };

  static FirstOrderDist gaussian(std::vector<double> mean,
                                 std::vector<double> var);
  static FirstOrderDist gaussian(double mean, double var);
  static FirstOrderDist point_mass(std::vector<double> location);
  static FirstOrderDist point_mass(double location);
  /// Mixture of diagonal Gaussians. Weights must be nonnegative and sum to 1
  /// within 1e-12. Components with zero variance act as atoms. A
  /// single-component mixture collapses to that component.
  static FirstOrderDist mixture(std::vector<double> weights,
                                std::vector<GaussianParams> components);
  /// Empirical sample set, one row per observation; at least two rows so the
  /// pair-based entropy estimator is defined.
  static FirstOrderDist empirical(Matrix samples);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }

  /// True when the distribution has a Lebesgue density (Gaussian or mixture
  /// with strictly positive variances in every coordinate).
  bool has_density() const;

  const GaussianParams& gaussian_params() const;
  const std::vector<double>& mixture_weights() const;
  const std::vector<GaussianParams>& mixture_components() const;
  const std::vector<double>& location() const;
  const Matrix& samples() const;

  /// The 1-D marginal in coordinate `j` (diagonal structure makes this exact
  /// for the parametric variants; Empirical keeps the j-th column).
  FirstOrderDist marginal(std::size_t j) const;

  /// Distribution of X + h.
  FirstOrderDist shifted(std::span<const double> h) const;
  /// Distribution of c * X, c > 0.
  FirstOrderDist scaled(double c) const;

 private:
  struct MixtureData {
    std::vector<double> weights;
    std::vector<GaussianParams> components;
  };

  FirstOrderDist(Kind kind, std::size_t dim,
                 std::variant<GaussianParams, MixtureData, std::vector<double>,
                              Matrix>
                     payload)
      : kind_(kind), dim_(dim), payload_(std::move(payload)) {}

  Kind kind_;
  std::size_t dim_;
  std::variant<GaussianParams, MixtureData, std::vector<double>, Matrix>
      payload_;
};

/// Weighted finite collection of first-order distributions: the second-order
/// object every uncertainty measure in this library consumes.
class SecondOrderEnsemble {
 public:
  /// Uniform weights.
  explicit SecondOrderEnsemble(std::vector<FirstOrderDist> members);
  /// Explicit weights; must be nonnegative and sum to 1 within 1e-12.
  SecondOrderEnsemble(std::vector<FirstOrderDist> members,
                      std::vector<double> weights);

  std::size_t size() const { return members_.size(); }
  std::size_t dim() const { return members_.front().dim(); }
  const std::vector<FirstOrderDist>& members() const { return members_; }
  const std::vector<double>& weights() const { return weights_; }
  const FirstOrderDist& member(std::size_t m) const { return members_[m]; }
  double weight(std::size_t m) const { return weights_[m]; }

 private:
  std::vector<FirstOrderDist> members_;
  std::vector<double> weights_;
};

/// The model average of an ensemble, materialized as a first-order
/// distribution (a Gaussian mixture for parametric members, pooled samples
/// otherwise).
using BmaDist = FirstOrderDist;

/// Model-average distribution of a fully parametric ensemble
/// (Gaussian/PointMass/Mixture members). Throws if any member is Empirical;
/// use the pooling overload for those.
BmaDist bma(const SecondOrderEnsemble& ensemble);

/// Model average when sample-based members are present. With uniform weights
/// and equal sample counts the member samples are pooled exactly; otherwise
/// `pool_size` points are resampled (member chosen by weight, then a row of
/// it), seeded for reproducibility. Parametric ensembles ignore the pooling
/// parameters and defer to the exact overload.
BmaDist bma(const SecondOrderEnsemble& ensemble, std::size_t pool_size,
            std::uint64_t seed);

/// Draws n rows from the distribution. Equal seeds give bit-identical output.
Matrix sample(const FirstOrderDist& dist, std::size_t n, std::uint64_t seed);

struct MeanAndCovTrace {
  std::vector<double> mean;
  double cov_trace = 0.0;
};

/// First moment and total variance (trace of the covariance). Exact for the
/// parametric variants; for Empirical the mean is the sample mean and the
/// trace is the unbiased sample variance summed over coordinates, which is
/// exactly what the pair-based entropy estimator of the squared-error score
/// produces.
MeanAndCovTrace mean_and_cov_trace(const FirstOrderDist& dist);

}  // namespace kscore

#endif  // KSCORE_DISTRIBUTIONS_HPP
