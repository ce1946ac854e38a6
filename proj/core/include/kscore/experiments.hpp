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

#ifndef KSCORE_EXPERIMENTS_HPP
#define KSCORE_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kscore/decomposition.hpp"
#include "kscore/distributions.hpp"
#include "kscore/scores.hpp"

namespace kscore {

// ---------------------------------------------------------------------------
// Synthetic regression task
// ---------------------------------------------------------------------------

enum class GeneratorFamily { Sine, Linear };

/// One-dimensional synthetic regression task with heteroscedastic noise and
/// an explicit train region inside a wider evaluation domain, so every grid
/// point carries an in/out label.
struct SyntheticTask {
  GeneratorFamily family = GeneratorFamily::Sine;
  double noise_base = 0.1;  // noise sd is noise_base * (1 + |x|)
  double train_lo = -1.0;
  double train_hi = 1.0;
  double eval_lo = -3.0;
  double eval_hi = 3.0;
  std::size_t eval_points = 601;
  std::size_t n_train = 80;
  std::uint64_t seed = 17;

  /// y = sin(3x) + 0.1 (1 + |x|) eps on [-1,1], evaluated on [-3,3] with 601
  /// grid points. Regression values elsewhere in the suite are pinned to
  /// this task.
  static SyntheticTask default_task();

  double mean_fn(double x) const;
  double noise_sd(double x) const;
  bool in_train_region(double x) const {
    return x >= train_lo && x <= train_hi;
  }
};

struct LabeledPoints {
  std::vector<double> x;
  std::vector<double> y;
};

/// Draws n covariates uniformly in [lo, hi] with noisy labels from the task
/// generator.
LabeledPoints draw_points(const SyntheticTask& task, std::size_t n, double lo,
                          double hi, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Base learners: bootstrap ensemble of cubic least-squares fits
// ---------------------------------------------------------------------------

/// Ensemble of degree-3 polynomial least-squares fits, each trained on a
/// bootstrap resample, with Gaussian predictive distributions whose variance
/// is the member's residual variance. Out-of-region extrapolations disagree
/// across bootstraps, which is what gives the ensemble genuine epistemic
/// spread.
struct PolyEnsemble {
  Matrix coefficients;              // members x 4, ascending powers
  std::vector<double> residual_var; // per member
  std::vector<std::uint8_t> degenerate;  // zero residual variance flags

  std::size_t members() const { return coefficients.rows(); }
  double member_mean(std::size_t m, double x) const;
  SecondOrderEnsemble predict(double x) const;
  FirstOrderDist predict_bma(double x) const;
};

PolyEnsemble fit_poly_ensemble(std::span<const double> x,
                               std::span<const double> y, std::size_t members,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Out-of-distribution ranking
// ---------------------------------------------------------------------------

struct OodResult {
  std::vector<double> grid_x;
  std::vector<std::uint8_t> in_region;
  std::vector<ScoreKind> kinds;  // with median bandwidths resolved
  Matrix eu;                     // kinds x grid points (pairwise estimator)
  std::vector<double> auroc;     // EU as an out-of-region classifier
  std::vector<std::string> point_errors;
  std::vector<std::uint8_t> member_degenerate;
  double resolved_gamma = 0.0;   // 0 when no median bandwidth was requested
};

/// Fits the bootstrap ensemble on in-region data only, evaluates pairwise EU
/// for each requested score at every grid point, and reports the AUROC of EU
/// as an in/out classifier.
OodResult ood_rank(const SyntheticTask& task, std::size_t members,
                   std::span<const ScoreSpec> scores, const EvalPolicy& policy);

// ---------------------------------------------------------------------------
// Active-learning simulation and bandwidth sweep
// ---------------------------------------------------------------------------

enum class AcquisitionRule { EpistemicUncertainty, Random };

struct AcquisitionConfig {
  std::size_t rounds = 40;
  std::size_t batch_size = 20;
  std::size_t members = 10;
  std::size_t pool_size = 1000;
  std::size_t test_size = 400;
  std::size_t initial_train = 30;
  AcquisitionRule rule = AcquisitionRule::EpistemicUncertainty;
  ScoreKind eu_kind = ScoreKind::gaussian_kernel(1.0);
  std::uint64_t seed = 1;
};

struct AcquisitionResult {
  double initial_crps = 0.0;
  std::vector<double> crps_per_round;   // length == rounds
  std::vector<std::size_t> acquired;    // pool indices, acquisition order

  double final_crps() const {
    return crps_per_round.empty() ? initial_crps : crps_per_round.back();
  }
};

/// Runs the acquisition loop: fit, rank the remaining pool (by pairwise EU
/// under eu_kind, or uniformly at random), acquire a batch, refit, score the
/// test set with the CRPS of the model-average prediction. No pool index is
/// ever acquired twice.
AcquisitionResult run_acquisition(const SyntheticTask& task,
                                  const AcquisitionConfig& config);

struct SweepResult {
  std::vector<double> gammas;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<AcquisitionResult>> runs;  // [gamma][seed]

  double mean_final_crps(std::size_t gamma_index) const;
};

/// Bandwidth sweep: the acquisition loop under the Gaussian-kernel EU for
/// each bandwidth in `gammas` (all in (0, 2]), repeated per seed.
SweepResult bandwidth_sweep(const SyntheticTask& task,
                            std::span<const double> gammas,
                            const AcquisitionConfig& base_config,
                            std::span<const std::uint64_t> seeds);

/// Mean CRPS of the predictions at the targets; a thin wrapper over the
/// energy score with beta = 1.
double crps_eval(std::span<const FirstOrderDist> predictions,
                 std::span<const double> targets);

}  // namespace kscore

#endif  // KSCORE_EXPERIMENTS_HPP
