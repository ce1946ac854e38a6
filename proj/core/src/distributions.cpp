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

#include "kscore/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kscore/rng.hpp"
#include "kscore/stats.hpp"

namespace kscore {

namespace {

constexpr double kWeightTol = 1e-12;

void check_simplex(std::span<const double> weights, const char* what) {
  if (weights.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty weight vector");
  }
  Accumulator sum;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument(std::string(what) +
                                  ": weights must be nonnegative");
    }
    sum.add(w);
  }
  if (std::abs(sum.total() - 1.0) > kWeightTol) {
    throw std::invalid_argument(std::string(what) +
                                ": weights must sum to 1 within 1e-12");
  }
}

void check_gaussian(const GaussianParams& g) {
  if (g.mean.empty() || g.mean.size() != g.var.size()) {
    throw std::invalid_argument(
        "gaussian: mean and variance must be nonempty and equal length");
  }
  for (double v : g.var) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("gaussian: variances must be finite and >= 0");
    }
  }
  for (double m : g.mean) {
    if (!std::isfinite(m)) {
      throw std::invalid_argument("gaussian: mean must be finite");
    }
  }
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

FirstOrderDist FirstOrderDist::gaussian(std::vector<double> mean,
                                        std::vector<double> var) {
  GaussianParams g{std::move(mean), std::move(var)};
  check_gaussian(g);
  if (all_zero(g.var)) {
    // Degenerate Gaussian is a point mass; normalizing here keeps the
    // zero-variance case on exactly the same code paths as PointMass.
    return point_mass(std::move(g.mean));
  }
  const std::size_t d = g.mean.size();
  return FirstOrderDist(Kind::Gaussian, d, std::move(g));
}

FirstOrderDist FirstOrderDist::gaussian(double mean, double var) {
  return gaussian(std::vector<double>{mean}, std::vector<double>{var});
}

FirstOrderDist FirstOrderDist::point_mass(std::vector<double> location) {
  if (location.empty()) {
    throw std::invalid_argument("point_mass: empty location");
  }
  for (double x : location) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("point_mass: location must be finite");
    }
  }
  const std::size_t d = location.size();
  return FirstOrderDist(Kind::PointMass, d, std::move(location));
}

FirstOrderDist FirstOrderDist::point_mass(double location) {
  return point_mass(std::vector<double>{location});
}

FirstOrderDist FirstOrderDist::mixture(std::vector<double> weights,
                                       std::vector<GaussianParams> components) {
  if (weights.size() != components.size()) {
    throw std::invalid_argument("mixture: one weight per component required");
  }
  check_simplex(weights, "mixture");
  const std::size_t d = components.front().mean.size();
  for (const auto& c : components) {
    check_gaussian(c);
    if (c.mean.size() != d) {
      throw std::invalid_argument("mixture: components must share dimension");
    }
  }
  if (components.size() == 1) {
    return gaussian(std::move(components.front().mean),
                    std::move(components.front().var));
  }
  MixtureData data{std::move(weights), std::move(components)};
  return FirstOrderDist(Kind::Mixture, d, std::move(data));
}

FirstOrderDist FirstOrderDist::empirical(Matrix samples) {
  if (samples.rows() < 2) {
    throw std::invalid_argument(
        "empirical: at least two samples required for pair-based estimation");
  }
  if (samples.cols() == 0) {
    throw std::invalid_argument("empirical: zero-dimensional samples");
  }
  for (double x : samples.flat()) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("empirical: samples must be finite");
    }
  }
  const std::size_t d = samples.cols();
  return FirstOrderDist(Kind::Empirical, d, std::move(samples));
}

bool FirstOrderDist::has_density() const {
  switch (kind_) {
    case Kind::Gaussian: {
      const auto& g = gaussian_params();
      return std::all_of(g.var.begin(), g.var.end(),
                         [](double v) { return v > 0.0; });
    }
    case Kind::Mixture: {
      for (const auto& c : mixture_components()) {
        if (!std::all_of(c.var.begin(), c.var.end(),
                         [](double v) { return v > 0.0; })) {
          return false;
        }
      }
      return true;
    }
    default:
      return false;
  }
}

const GaussianParams& FirstOrderDist::gaussian_params() const {
  if (kind_ != Kind::Gaussian) {
    throw std::logic_error("not a Gaussian distribution");
  }
  return std::get<GaussianParams>(payload_);
}

const std::vector<double>& FirstOrderDist::mixture_weights() const {
  if (kind_ != Kind::Mixture) throw std::logic_error("not a mixture");
  return std::get<MixtureData>(payload_).weights;
}

const std::vector<GaussianParams>& FirstOrderDist::mixture_components() const {
  if (kind_ != Kind::Mixture) throw std::logic_error("not a mixture");
  return std::get<MixtureData>(payload_).components;
}

const std::vector<double>& FirstOrderDist::location() const {
  if (kind_ != Kind::PointMass) throw std::logic_error("not a point mass");
  return std::get<std::vector<double>>(payload_);
}

const Matrix& FirstOrderDist::samples() const {
  if (kind_ != Kind::Empirical) throw std::logic_error("not empirical");
  return std::get<Matrix>(payload_);
}

FirstOrderDist FirstOrderDist::marginal(std::size_t j) const {
  if (j >= dim_) throw std::invalid_argument("marginal: coordinate out of range");
  switch (kind_) {
    case Kind::Gaussian: {
      const auto& g = gaussian_params();
      return gaussian(g.mean[j], g.var[j]);
    }
    case Kind::Mixture: {
      std::vector<GaussianParams> comps;
      comps.reserve(mixture_components().size());
      for (const auto& c : mixture_components()) {
        comps.push_back({{c.mean[j]}, {c.var[j]}});
      }
      return mixture(mixture_weights(), std::move(comps));
    }
    case Kind::PointMass:
      return point_mass(location()[j]);
    case Kind::Empirical: {
      const auto& s = samples();
      Matrix col(s.rows(), 1);
      for (std::size_t i = 0; i < s.rows(); ++i) col(i, 0) = s(i, j);
      return empirical(std::move(col));
    }
  }
  throw std::logic_error("unreachable");
}

FirstOrderDist FirstOrderDist::shifted(std::span<const double> h) const {
  if (h.size() != dim_) throw std::invalid_argument("shifted: dimension mismatch");
  switch (kind_) {
    case Kind::Gaussian: {
      auto g = gaussian_params();
      for (std::size_t j = 0; j < dim_; ++j) g.mean[j] += h[j];
      return gaussian(std::move(g.mean), std::move(g.var));
    }
    case Kind::Mixture: {
      auto comps = mixture_components();
      for (auto& c : comps) {
        for (std::size_t j = 0; j < dim_; ++j) c.mean[j] += h[j];
      }
      return mixture(mixture_weights(), std::move(comps));
    }
    case Kind::PointMass: {
      auto loc = location();
      for (std::size_t j = 0; j < dim_; ++j) loc[j] += h[j];
      return point_mass(std::move(loc));
    }
    case Kind::Empirical: {
      Matrix s = samples();
      for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t j = 0; j < dim_; ++j) s(i, j) += h[j];
      }
      return empirical(std::move(s));
    }
  }
  throw std::logic_error("unreachable");
}

FirstOrderDist FirstOrderDist::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
  switch (kind_) {
    case Kind::Gaussian: {
      auto g = gaussian_params();
      for (auto& m : g.mean) m *= c;
      for (auto& v : g.var) v *= c * c;
      return gaussian(std::move(g.mean), std::move(g.var));
    }
    case Kind::Mixture: {
      auto comps = mixture_components();
      for (auto& comp : comps) {
        for (auto& m : comp.mean) m *= c;
        for (auto& v : comp.var) v *= c * c;
      }
      return mixture(mixture_weights(), std::move(comps));
    }
    case Kind::PointMass: {
      auto loc = location();
      for (auto& x : loc) x *= c;
      return point_mass(std::move(loc));
    }
    case Kind::Empirical: {
      Matrix s = samples();
      for (double& x : s.flat()) x *= c;
      return empirical(std::move(s));
    }
  }
  throw std::logic_error("unreachable");
}

SecondOrderEnsemble::SecondOrderEnsemble(std::vector<FirstOrderDist> members)
    : SecondOrderEnsemble(std::move(members), {}) {}

SecondOrderEnsemble::SecondOrderEnsemble(std::vector<FirstOrderDist> members,
                                         std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
  if (members_.empty()) {
    throw std::invalid_argument("ensemble: at least one member required");
  }
  const std::size_t d = members_.front().dim();
  for (const auto& m : members_) {
    if (m.dim() != d) {
      throw std::invalid_argument("ensemble: members must share dimension");
    }
  }
  if (weights_.empty()) {
    weights_.assign(members_.size(), 1.0 / static_cast<double>(members_.size()));
  } else {
    if (weights_.size() != members_.size()) {
      throw std::invalid_argument("ensemble: one weight per member required");
    }
    check_simplex(weights_, "ensemble");
  }
}

namespace {

// Flattens a parametric member into weighted Gaussian components.
void append_components(const FirstOrderDist& member, double weight,
                       std::vector<double>& weights,
                       std::vector<GaussianParams>& comps) {
  switch (member.kind()) {
    case FirstOrderDist::Kind::Gaussian:
      weights.push_back(weight);
      comps.push_back(member.gaussian_params());
      return;
    case FirstOrderDist::Kind::PointMass:
      weights.push_back(weight);
      comps.push_back({member.location(),
                       std::vector<double>(member.dim(), 0.0)});
      return;
    case FirstOrderDist::Kind::Mixture: {
      const auto& ws = member.mixture_weights();
      const auto& cs = member.mixture_components();
      for (std::size_t i = 0; i < cs.size(); ++i) {
        weights.push_back(weight * ws[i]);
        comps.push_back(cs[i]);
      }
      return;
    }
    case FirstOrderDist::Kind::Empirical:
      throw std::invalid_argument(
          "bma: sample-based member requires the pooling overload");
  }
}

bool has_empirical_member(const SecondOrderEnsemble& ensemble) {
  for (const auto& m : ensemble.members()) {
    if (m.kind() == FirstOrderDist::Kind::Empirical) return true;
  }
  return false;
}

}  // namespace

BmaDist bma(const SecondOrderEnsemble& ensemble) {
  if (ensemble.size() == 1) return ensemble.member(0);
  std::vector<double> weights;
  std::vector<GaussianParams> comps;
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    append_components(ensemble.member(m), ensemble.weight(m), weights, comps);
  }
  // Renormalize away accumulated rounding in the flattened weights.
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return FirstOrderDist::mixture(std::move(weights), std::move(comps));
}

BmaDist bma(const SecondOrderEnsemble& ensemble, std::size_t pool_size,
            std::uint64_t seed) {
  if (!has_empirical_member(ensemble)) return bma(ensemble);
  if (ensemble.size() == 1) return ensemble.member(0);

  // Uniform weights over equally sized sample sets pool exactly.
  bool exact_pool = true;
  std::size_t n0 = 0;
  for (std::size_t m = 0; m < ensemble.size() && exact_pool; ++m) {
    const auto& member = ensemble.member(m);
    if (member.kind() != FirstOrderDist::Kind::Empirical) {
      exact_pool = false;
      break;
    }
    const std::size_t n = member.samples().rows();
    if (m == 0) n0 = n;
    exact_pool = (n == n0) &&
                 std::abs(ensemble.weight(m) - ensemble.weight(0)) <= 1e-15;
  }
  if (exact_pool) {
    const std::size_t d = ensemble.dim();
    Matrix pooled(n0 * ensemble.size(), d);
    std::size_t r = 0;
    for (const auto& member : ensemble.members()) {
      const auto& s = member.samples();
      for (std::size_t i = 0; i < s.rows(); ++i, ++r) {
        for (std::size_t j = 0; j < d; ++j) pooled(r, j) = s(i, j);
      }
    }
    return FirstOrderDist::empirical(std::move(pooled));
  }

  if (pool_size < 2) {
    throw std::invalid_argument("bma: pool_size must be at least 2");
  }
  const std::size_t d = ensemble.dim();
  Matrix pooled(pool_size, d);
  Rng pick(derive_seed(seed, 0x706f6f6cULL));
  for (std::size_t i = 0; i < pool_size; ++i) {
    const std::size_t m = pick.discrete(ensemble.weights());
    const Matrix row = sample(ensemble.member(m), 1, derive_seed(seed, i + 1));
    for (std::size_t j = 0; j < d; ++j) pooled(i, j) = row(0, j);
  }
  return FirstOrderDist::empirical(std::move(pooled));
}

Matrix sample(const FirstOrderDist& dist, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be positive");
  const std::size_t d = dist.dim();
  Matrix out(n, d);
  Rng rng(seed);
  switch (dist.kind()) {
    case FirstOrderDist::Kind::Gaussian: {
      const auto& g = dist.gaussian_params();
      std::vector<double> sd(d);
      for (std::size_t j = 0; j < d; ++j) sd[j] = std::sqrt(g.var[j]);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          out(i, j) = g.mean[j] + sd[j] * rng.normal();
        }
      }
      return out;
    }
    case FirstOrderDist::Kind::Mixture: {
      const auto& ws = dist.mixture_weights();
      const auto& cs = dist.mixture_components();
      for (std::size_t i = 0; i < n; ++i) {
        const auto& c = cs[rng.discrete(ws)];
        for (std::size_t j = 0; j < d; ++j) {
          out(i, j) = c.mean[j] + std::sqrt(c.var[j]) * rng.normal();
        }
      }
      return out;
    }
    case FirstOrderDist::Kind::PointMass: {
      const auto& loc = dist.location();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) out(i, j) = loc[j];
      }
      return out;
    }
    case FirstOrderDist::Kind::Empirical: {
      const auto& s = dist.samples();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = rng.index(s.rows());
        for (std::size_t j = 0; j < d; ++j) out(i, j) = s(r, j);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

MeanAndCovTrace mean_and_cov_trace(const FirstOrderDist& dist) {
  const std::size_t d = dist.dim();
  MeanAndCovTrace out;
  out.mean.assign(d, 0.0);
  switch (dist.kind()) {
    case FirstOrderDist::Kind::Gaussian: {
      const auto& g = dist.gaussian_params();
      out.mean = g.mean;
      Accumulator tr;
      for (double v : g.var) tr.add(v);
      out.cov_trace = tr.total();
      return out;
    }
    case FirstOrderDist::Kind::PointMass:
      out.mean = dist.location();
      out.cov_trace = 0.0;
      return out;
    case FirstOrderDist::Kind::Mixture: {
      const auto& ws = dist.mixture_weights();
      const auto& cs = dist.mixture_components();
      for (std::size_t j = 0; j < d; ++j) {
        Accumulator mj;
        for (std::size_t i = 0; i < cs.size(); ++i) {
          mj.add(ws[i] * cs[i].mean[j]);
        }
        out.mean[j] = mj.total();
      }
      // Law of total variance per coordinate.
      Accumulator tr;
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
          const double dm = cs[i].mean[j] - out.mean[j];
          tr.add(ws[i] * (cs[i].var[j] + dm * dm));
        }
      }
      out.cov_trace = tr.total();
      return out;
    }
    case FirstOrderDist::Kind::Empirical: {
      const auto& s = dist.samples();
      const double n = static_cast<double>(s.rows());
      for (std::size_t j = 0; j < d; ++j) {
        Accumulator mj;
        for (std::size_t i = 0; i < s.rows(); ++i) mj.add(s(i, j));
        out.mean[j] = mj.total() / n;
      }
      Accumulator tr;
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < s.rows(); ++i) {
          const double dm = s(i, j) - out.mean[j];
          tr.add(dm * dm);
        }
      }
      out.cov_trace = tr.total() / (n - 1.0);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace kscore
