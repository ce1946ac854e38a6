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

#include "kscore/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kscore/rng.hpp"
#include "kscore/stats.hpp"

namespace kscore {

namespace {

double weighted_member_entropy(const SecondOrderEnsemble& base,
                               const ScoreKind& score,
                               const EvalPolicy& policy) {
  Accumulator au;
  for (std::size_t m = 0; m < base.size(); ++m) {
    au.add(base.weight(m) *
           entropy(score, policy.with_stream(0x1F000 + m), base.member(m)));
  }
  return au.total();
}

// Per-coordinate mean and variance of a parametric member.
void member_moments(const FirstOrderDist& member, std::vector<double>& mean,
                    std::vector<double>& var) {
  const std::size_t d = member.dim();
  mean.assign(d, 0.0);
  var.assign(d, 0.0);
  switch (member.kind()) {
    case FirstOrderDist::Kind::Gaussian: {
      mean = member.gaussian_params().mean;
      var = member.gaussian_params().var;
      return;
    }
    case FirstOrderDist::Kind::PointMass:
      mean = member.location();
      return;
    case FirstOrderDist::Kind::Mixture: {
      const auto& ws = member.mixture_weights();
      const auto& cs = member.mixture_components();
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
          mean[j] += ws[i] * cs[i].mean[j];
        }
        for (std::size_t i = 0; i < cs.size(); ++i) {
          const double dm = cs[i].mean[j] - mean[j];
          var[j] += ws[i] * (cs[i].var[j] + dm * dm);
        }
      }
      return;
    }
    case FirstOrderDist::Kind::Empirical:
      throw std::invalid_argument(
          "distortion_experiment: instances must be parametric");
  }
}

}  // namespace

double influence(const SecondOrderEnsemble& base,
                 const FirstOrderDist& contaminant, const ScoreKind& score,
                 const EvalPolicy& policy) {
  const double h0 = entropy(score, policy.with_stream(0x1F7FF), contaminant);
  return h0 - weighted_member_entropy(base, score, policy);
}

InfluencePath influence_sweep(const SecondOrderEnsemble& base,
                              std::span<const double> center,
                              std::span<const double> sigma0_sq_grid,
                              const ScoreKind& score,
                              const EvalPolicy& policy) {
  if (sigma0_sq_grid.empty()) {
    throw std::invalid_argument("influence_sweep: empty grid");
  }
  const double au = weighted_member_entropy(base, score, policy);
  std::vector<std::pair<double, double>> sweep;
  sweep.reserve(sigma0_sq_grid.size());
  const std::vector<double> c(center.begin(), center.end());
  for (double s2 : sigma0_sq_grid) {
    const auto contaminant =
        FirstOrderDist::gaussian(c, std::vector<double>(c.size(), s2));
    const double h0 = entropy(score, policy, contaminant);
    sweep.emplace_back(s2, h0 - au);
  }
  InfluencePath path{
      FirstOrderDist::gaussian(
          c, std::vector<double>(c.size(), sigma0_sq_grid.back())),
      score, sweep.back().second, std::move(sweep)};
  return path;
}

std::string to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::Log:
      return "log";
    case GrowthClass::Sqrt:
      return "sqrt";
    case GrowthClass::Linear:
      return "linear";
    case GrowthClass::Bounded:
      return "bounded";
  }
  return {};
}

GrowthFit growth_fit(const ScoreKind& score,
                     std::span<const double> sigma0_sq_grid) {
  std::vector<double> grid(sigma0_sq_grid.begin(), sigma0_sq_grid.end());
  std::sort(grid.begin(), grid.end());
  if (grid.size() < 3 || !(grid.front() > 0.0) ||
      grid.back() / grid.front() < 1e4) {
    throw std::domain_error("degenerate grid");
  }

  GrowthFit fit;
  fit.sigma0_sq = grid;
  fit.entropies.reserve(grid.size());
  const auto policy = EvalPolicy::closed_form();
  for (double s2 : grid) {
    fit.entropies.push_back(
        entropy(score, policy, FirstOrderDist::gaussian(0.0, s2)));
  }
  fit.terminal_entropy = fit.entropies.back();

  std::vector<double> log_s2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) log_s2[i] = std::log(grid[i]);
  fit.semilog_slope = linear_fit(log_s2, fit.entropies).slope;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (fit.entropies[i] > 0.0) {
      lx.push_back(log_s2[i]);
      ly.push_back(std::log(fit.entropies[i]));
    }
  }
  fit.slope = lx.size() >= 2 ? linear_fit(lx, ly).slope : 0.0;

  // Bounded: the last decade's increment is negligible relative to the
  // level. Otherwise split the diverging cases by the log-log slope.
  const double h_last = fit.entropies.back();
  const double h_prev = fit.entropies[fit.entropies.size() - 2];
  const double rel_step =
      std::abs(h_last - h_prev) / std::max(std::abs(h_last), 1e-300);
  if (rel_step < 0.01) {
    fit.classification = GrowthClass::Bounded;
  } else if (fit.slope >= 0.75) {
    fit.classification = GrowthClass::Linear;
  } else if (fit.slope >= 0.3) {
    fit.classification = GrowthClass::Sqrt;
  } else {
    fit.classification = GrowthClass::Log;
  }
  return fit;
}

double mape(std::span<const double> base, std::span<const double> distorted) {
  if (base.size() != distorted.size() || base.empty()) {
    throw std::invalid_argument("mape: mismatched or empty inputs");
  }
  Accumulator acc;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i] == 0.0) throw std::domain_error("MAPE undefined");
    acc.add(std::abs((distorted[i] - base[i]) / base[i]));
  }
  return 100.0 * acc.total() / static_cast<double>(base.size());
}

DistortionResult distortion_experiment(
    std::span<const SecondOrderEnsemble> base, std::span<const double> deltas,
    std::span<const ScoreKind> kinds, std::uint64_t seed,
    const EvalPolicy& policy) {
  if (base.empty() || deltas.empty() || kinds.empty()) {
    throw std::invalid_argument("distortion_experiment: empty inputs");
  }
  const std::size_t n = base.size();

  // Base AU per kind per instance.
  std::vector<std::vector<double>> base_au(kinds.size(),
                                           std::vector<double>(n));
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      base_au[k][i] = weighted_member_entropy(base[i], kinds[k], policy);
    }
  }

  DistortionResult out;
  out.kinds.assign(kinds.begin(), kinds.end());
  out.deltas.assign(deltas.begin(), deltas.end());
  out.mape_table = Matrix(kinds.size(), deltas.size());

  std::vector<double> ref_mean, ref_var;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    if (delta < 0.0) {
      throw std::invalid_argument("distortion_experiment: delta must be >= 0");
    }
    // Contaminated copies of every instance for this delta.
    std::vector<SecondOrderEnsemble> contaminated;
    contaminated.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      member_moments(base[i].member(0), ref_mean, ref_var);
      Rng rng(derive_seed(seed, di * n + i));
      std::vector<double> c_mean(ref_mean.size());
      std::vector<double> c_var(ref_var.size());
      for (std::size_t j = 0; j < ref_mean.size(); ++j) {
        c_mean[j] = ref_mean[j] + delta * rng.normal();
        c_var[j] = ref_var[j] + delta * delta;
      }
      auto members = base[i].members();
      members.push_back(FirstOrderDist::gaussian(c_mean, c_var));
      const double eps = 1.0 / static_cast<double>(members.size());
      std::vector<double> weights(members.size());
      for (std::size_t m = 0; m + 1 < members.size(); ++m) {
        weights[m] = (1.0 - eps) * base[i].weight(m);
      }
      weights.back() = eps;
      contaminated.emplace_back(std::move(members), std::move(weights));
    }
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      std::vector<double> au(n);
      for (std::size_t i = 0; i < n; ++i) {
        au[i] = weighted_member_entropy(contaminated[i], kinds[k], policy);
      }
      out.mape_table(k, di) = mape(base_au[k], au);
    }
  }
  return out;
}

std::vector<SecondOrderEnsemble> synthetic_gaussian_instances(
    std::size_t n_instances, std::size_t members, std::uint64_t seed) {
  if (n_instances == 0 || members == 0) {
    throw std::invalid_argument("synthetic_gaussian_instances: empty request");
  }
  std::vector<SecondOrderEnsemble> out;
  out.reserve(n_instances);
  for (std::size_t i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, i));
    const double center = -2.0 + 4.0 * rng.uniform();
    const double base_var = 0.2 + 1.3 * rng.uniform();
    std::vector<FirstOrderDist> ms;
    ms.reserve(members);
    for (std::size_t m = 0; m < members; ++m) {
      const double mu = center + 0.3 * rng.normal();
      const double jitter = 1.0 + 0.2 * (2.0 * rng.uniform() - 1.0);
      ms.push_back(FirstOrderDist::gaussian(mu, base_var * jitter));
    }
    out.emplace_back(std::move(ms));
  }
  return out;
}

}  // namespace kscore
