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

#include "kscore/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kscore {

KernelSpec KernelSpec::squared_euclidean() {
  return KernelSpec(Family::SquaredEuclidean, 2.0);
}

KernelSpec KernelSpec::power(double beta) {
  if (!(beta > 0.0) || !(beta < 2.0)) {
    throw std::invalid_argument("power kernel: beta must lie in (0, 2)");
  }
  return KernelSpec(Family::Power, beta);
}

KernelSpec KernelSpec::gaussian(double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gaussian kernel: gamma must be positive");
  }
  return KernelSpec(Family::Gaussian, gamma);
}

std::optional<double> KernelSpec::homogeneous_degree() const {
  switch (family_) {
    case Family::SquaredEuclidean:
      return 2.0;
    case Family::Power:
      return param_;
    case Family::Gaussian:
      return std::nullopt;
  }
  return std::nullopt;
}

double KernelSpec::eval_r2(double r2) const {
  switch (family_) {
    case Family::SquaredEuclidean:
      return r2;
    case Family::Power:
      return std::pow(r2, 0.5 * param_);
    case Family::Gaussian:
      return 1.0 - std::exp(-r2 / (param_ * param_));
  }
  return 0.0;
}

double KernelSpec::eval(std::span<const double> x,
                        std::span<const double> y) const {
  require_same_dim(x, y);
  double r2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    r2 += d * d;
  }
  return eval_r2(r2);
}

std::string KernelSpec::name() const {
  switch (family_) {
    case Family::SquaredEuclidean:
      return "se";
    case Family::Power:
      return "energy:" + std::to_string(param_);
    case Family::Gaussian:
      return "gauss:" + std::to_string(param_);
  }
  return {};
}

double median_heuristic(const Matrix& points) {
  const std::size_t n = points.rows();
  if (n < 2) {
    throw std::invalid_argument("median_heuristic: at least two points required");
  }
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      double r2 = 0.0;
      for (std::size_t j = 0; j < points.cols(); ++j) {
        const double d = points(i, j) - points(k, j);
        r2 += d * d;
      }
      dists.push_back(std::sqrt(r2));
    }
  }
  const std::size_t mid = (dists.size() - 1) / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<long>(mid),
                   dists.end());
  const double gamma = dists[mid];
  if (!(gamma > 0.0)) {
    throw std::domain_error("degenerate bandwidth");
  }
  return gamma;
}

Matrix bandwidth_reference_points(
    std::span<const SecondOrderEnsemble> ensembles) {
  if (ensembles.empty()) {
    throw std::invalid_argument("bandwidth_reference_points: no ensembles");
  }
  const std::size_t d = ensembles.front().dim();
  std::vector<double> rows;
  for (const auto& ens : ensembles) {
    if (ens.dim() != d) {
      throw std::invalid_argument(
          "bandwidth_reference_points: mixed dimensions");
    }
    for (const auto& member : ens.members()) {
      if (member.kind() == FirstOrderDist::Kind::Empirical) {
        const auto& s = member.samples();
        rows.insert(rows.end(), s.flat().begin(), s.flat().end());
      } else {
        const auto mt = mean_and_cov_trace(member);
        rows.insert(rows.end(), mt.mean.begin(), mt.mean.end());
      }
    }
  }
  Matrix out(rows.size() / d, d);
  std::copy(rows.begin(), rows.end(), out.flat().begin());
  return out;
}

double resolve_median_gamma(std::span<const SecondOrderEnsemble> ensembles,
                            std::size_t max_points) {
  const Matrix all = bandwidth_reference_points(ensembles);
  if (all.rows() <= max_points) return median_heuristic(all);
  const std::size_t stride = (all.rows() + max_points - 1) / max_points;
  Matrix thin((all.rows() + stride - 1) / stride, all.cols());
  std::size_t r = 0;
  for (std::size_t i = 0; i < all.rows(); i += stride, ++r) {
    for (std::size_t j = 0; j < all.cols(); ++j) thin(r, j) = all(i, j);
  }
  return median_heuristic(thin);
}

}  // namespace kscore
