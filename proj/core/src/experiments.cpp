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

#include "kscore/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "kscore/kernels.hpp"
#include "kscore/rng.hpp"
#include "kscore/stats.hpp"

namespace kscore {

SyntheticTask SyntheticTask::default_task() { return SyntheticTask{}; }

double SyntheticTask::mean_fn(double x) const {
  switch (family) {
    case GeneratorFamily::Sine:
      return std::sin(3.0 * x);
    case GeneratorFamily::Linear:
      return 0.7 * x + 0.1;
  }
  return 0.0;
}

double SyntheticTask::noise_sd(double x) const {
  return noise_base * (1.0 + std::abs(x));
}

LabeledPoints draw_points(const SyntheticTask& task, std::size_t n, double lo,
                          double hi, std::uint64_t seed) {
  LabeledPoints pts;
  pts.x.resize(n);
  pts.y.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * rng.uniform();
    pts.x[i] = x;
    pts.y[i] = task.mean_fn(x) + task.noise_sd(x) * rng.normal();
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Bootstrap polynomial ensemble
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kPolyOrder = 4;  // cubic: 4 coefficients

}  // namespace

double PolyEnsemble::member_mean(std::size_t m, double x) const {
  double acc = 0.0;
  double p = 1.0;
  for (std::size_t k = 0; k < coefficients.cols(); ++k, p *= x) {
    acc += coefficients(m, k) * p;
  }
  return acc;
}

SecondOrderEnsemble PolyEnsemble::predict(double x) const {
  std::vector<FirstOrderDist> ms;
  ms.reserve(members());
  for (std::size_t m = 0; m < members(); ++m) {
    ms.push_back(FirstOrderDist::gaussian(member_mean(m, x), residual_var[m]));
  }
  return SecondOrderEnsemble(std::move(ms));
}

FirstOrderDist PolyEnsemble::predict_bma(double x) const {
  std::vector<GaussianParams> comps;
  comps.reserve(members());
  for (std::size_t m = 0; m < members(); ++m) {
    comps.push_back({{member_mean(m, x)}, {residual_var[m]}});
  }
  return FirstOrderDist::mixture(
      std::vector<double>(members(), 1.0 / static_cast<double>(members())),
      std::move(comps));
}

PolyEnsemble fit_poly_ensemble(std::span<const double> x,
                               std::span<const double> y, std::size_t members,
                               std::uint64_t seed) {
  if (x.size() != y.size() || x.size() < kPolyOrder + 1) {
    throw std::invalid_argument(
        "fit_poly_ensemble: need matching x/y with more points than "
        "coefficients");
  }
  if (members < 2) {
    throw std::invalid_argument("fit_poly_ensemble: at least two members");
  }
  const std::size_t n = x.size();
  PolyEnsemble ens;
  ens.coefficients = Matrix(members, kPolyOrder);
  ens.residual_var.assign(members, 0.0);
  ens.degenerate.assign(members, 0);

  Eigen::MatrixXd design(n, kPolyOrder);
  Eigen::VectorXd target(n);
  for (std::size_t m = 0; m < members; ++m) {
    Rng rng(derive_seed(seed, m));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rng.index(n);
      double p = 1.0;
      for (std::size_t k = 0; k < kPolyOrder; ++k, p *= x[r]) {
        design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = p;
      }
      target(static_cast<Eigen::Index>(i)) = y[r];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
    for (std::size_t k = 0; k < kPolyOrder; ++k) {
      ens.coefficients(m, k) = coef(static_cast<Eigen::Index>(k));
    }
    const double ss = (target - design * coef).squaredNorm();
    const double dof = static_cast<double>(n - kPolyOrder);
    const double rv = ss / dof;
    ens.residual_var[m] = rv > 0.0 && std::isfinite(rv) ? rv : 0.0;
    if (ens.residual_var[m] == 0.0) ens.degenerate[m] = 1;
  }
  return ens;
}

// ---------------------------------------------------------------------------
// OOD ranking
// ---------------------------------------------------------------------------

OodResult ood_rank(const SyntheticTask& task, std::size_t members,
                   std::span<const ScoreSpec> scores,
                   const EvalPolicy& policy) {
  if (scores.empty()) throw std::invalid_argument("ood_rank: no scores");
  const auto train = draw_points(task, task.n_train, task.train_lo,
                                 task.train_hi, derive_seed(task.seed, 0xDA7A));
  const auto model =
      fit_poly_ensemble(train.x, train.y, members, derive_seed(task.seed, 0xF17));

  OodResult out;
  out.member_degenerate = model.degenerate;
  out.grid_x.resize(task.eval_points);
  out.in_region.resize(task.eval_points);
  std::vector<SecondOrderEnsemble> ensembles;
  ensembles.reserve(task.eval_points);
  for (std::size_t i = 0; i < task.eval_points; ++i) {
    const double x =
        task.eval_points == 1
            ? task.eval_lo
            : task.eval_lo + (task.eval_hi - task.eval_lo) *
                                 static_cast<double>(i) /
                                 static_cast<double>(task.eval_points - 1);
    out.grid_x[i] = x;
    out.in_region[i] = task.in_train_region(x) ? 1 : 0;
    ensembles.push_back(model.predict(x));
  }

  // Resolve deferred median bandwidths against the fitted ensembles.
  double median_gamma = 0.0;
  out.kinds.reserve(scores.size());
  for (const auto& spec : scores) {
    if (spec.median_gamma) {
      if (median_gamma == 0.0) median_gamma = resolve_median_gamma(ensembles);
      out.kinds.push_back(ScoreKind::gaussian_kernel(median_gamma));
    } else {
      out.kinds.push_back(spec.kind);
    }
  }
  out.resolved_gamma = median_gamma;

  out.eu = Matrix(out.kinds.size(), task.eval_points);
  out.auroc.assign(out.kinds.size(), 0.0);
  for (std::size_t k = 0; k < out.kinds.size(); ++k) {
    std::vector<double> eu_ok;
    std::vector<std::uint8_t> label_ok;
    for (std::size_t i = 0; i < task.eval_points; ++i) {
      try {
        const auto dec = decompose(ensembles[i], out.kinds[k],
                                   EstimatorKind::Pairwise, policy);
        out.eu(k, i) = dec.eu;
        eu_ok.push_back(dec.eu);
        label_ok.push_back(out.in_region[i] ? 0 : 1);
      } catch (const std::exception& e) {
        out.eu(k, i) = std::numeric_limits<double>::quiet_NaN();
        out.point_errors.push_back(out.kinds[k].name() + " at x=" +
                                   std::to_string(out.grid_x[i]) + ": " +
                                   e.what());
      }
    }
    out.auroc[k] = auroc(eu_ok, label_ok);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Acquisition loop
// ---------------------------------------------------------------------------

double crps_eval(std::span<const FirstOrderDist> predictions,
                 std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("crps_eval: dimension mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("crps_eval: empty inputs");
  }
  const auto kind = ScoreKind::crps();
  const auto policy = EvalPolicy::closed_form();
  Accumulator acc;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    acc.add(score(kind, policy, predictions[i], targets[i]));
  }
  return acc.total() / static_cast<double>(predictions.size());
}

namespace {

double test_crps(const PolyEnsemble& model, const LabeledPoints& test) {
  std::vector<FirstOrderDist> preds;
  preds.reserve(test.x.size());
  for (double x : test.x) preds.push_back(model.predict_bma(x));
  return crps_eval(preds, test.y);
}

}  // namespace

AcquisitionResult run_acquisition(const SyntheticTask& task,
                                  const AcquisitionConfig& config) {
  if (config.rounds * config.batch_size > config.pool_size) {
    throw std::invalid_argument(
        "run_acquisition: pool too small for rounds * batch_size");
  }
  if (config.initial_train < kPolyOrder + 4) {
    throw std::invalid_argument("run_acquisition: initial train set too small");
  }
  const auto pool = draw_points(task, config.pool_size, task.eval_lo,
                                task.eval_hi, derive_seed(config.seed, 1));
  const auto test = draw_points(task, config.test_size, task.eval_lo,
                                task.eval_hi, derive_seed(config.seed, 2));
  auto train = draw_points(task, config.initial_train, task.train_lo,
                           task.train_hi, derive_seed(config.seed, 3));

  AcquisitionResult result;
  auto model = fit_poly_ensemble(train.x, train.y, config.members,
                                 derive_seed(config.seed, 100));
  result.initial_crps = test_crps(model, test);

  std::vector<std::size_t> remaining(config.pool_size);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  const auto policy = EvalPolicy::closed_form();

  for (std::size_t round = 0; round < config.rounds; ++round) {
    // Rank the remaining pool.
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(remaining.size());
    if (config.rule == AcquisitionRule::EpistemicUncertainty) {
      for (std::size_t idx : remaining) {
        const double eu = decompose(model.predict(pool.x[idx]), config.eu_kind,
                                    EstimatorKind::Pairwise, policy)
                              .eu;
        ranked.emplace_back(eu, idx);
      }
    } else {
      Rng rng(derive_seed(config.seed, 200 + round));
      for (std::size_t idx : remaining) {
        ranked.emplace_back(rng.uniform(), idx);
      }
    }
    // Highest score first; ties resolve to the lower pool index.
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    std::vector<std::size_t> batch;
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      batch.push_back(ranked[i].second);
    }
    for (std::size_t idx : batch) {
      train.x.push_back(pool.x[idx]);
      train.y.push_back(pool.y[idx]);
      result.acquired.push_back(idx);
    }
    std::erase_if(remaining, [&](std::size_t idx) {
      return std::find(batch.begin(), batch.end(), idx) != batch.end();
    });

    model = fit_poly_ensemble(train.x, train.y, config.members,
                              derive_seed(config.seed, 100 + round + 1));
    result.crps_per_round.push_back(test_crps(model, test));
  }
  return result;
}

double SweepResult::mean_final_crps(std::size_t gamma_index) const {
  const auto& row = runs[gamma_index];
  Accumulator acc;
  for (const auto& r : row) acc.add(r.final_crps());
  return acc.total() / static_cast<double>(row.size());
}

SweepResult bandwidth_sweep(const SyntheticTask& task,
                            std::span<const double> gammas,
                            const AcquisitionConfig& base_config,
                            std::span<const std::uint64_t> seeds) {
  if (gammas.empty() || seeds.empty()) {
    throw std::invalid_argument("bandwidth_sweep: empty gamma or seed list");
  }
  for (double g : gammas) {
    if (!(g > 0.0) || g > 2.0) {
      throw std::invalid_argument("bandwidth_sweep: gammas must lie in (0, 2]");
    }
  }
  SweepResult out;
  out.gammas.assign(gammas.begin(), gammas.end());
  out.seeds.assign(seeds.begin(), seeds.end());
  out.runs.resize(gammas.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    out.runs[g].reserve(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      AcquisitionConfig config = base_config;
      config.rule = AcquisitionRule::EpistemicUncertainty;
      config.eu_kind = ScoreKind::gaussian_kernel(gammas[g]);
      config.seed = seeds[s];
      out.runs[g].push_back(run_acquisition(task, config));
    }
  }
  return out;
}

}  // namespace kscore
