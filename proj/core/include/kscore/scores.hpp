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

#ifndef KSCORE_SCORES_HPP
#define KSCORE_SCORES_HPP

#include <cstdint>
#include <span>
#include <string>

#include "kscore/distributions.hpp"
#include "kscore/kernels.hpp"

namespace kscore {

/// A scoring rule. The kernel families (squared error, energy, Gaussian
/// kernel) measure discrepancy through a negative definite kernel; the log
/// score is density-based and is the one member of the family that is not a
/// kernel score (its entropy can be negative).
///
/// A marginal wrapper applies a univariate rule per coordinate and sums,
/// which is the standard way to get a strictly proper multivariate rule from
/// a univariate one.
class ScoreKind {
 public:
  enum class Family { Log, SquaredError, Energy, GaussianKernel };

  static ScoreKind log_score();
  static ScoreKind squared_error();
  /// Energy score with exponent beta in (0, 2]. beta = 2 degenerates to the
  /// squared error; beta = 1 in one dimension is the CRPS.
  static ScoreKind energy(double beta);
  static ScoreKind crps() { return energy(1.0); }
  static ScoreKind gaussian_kernel(double gamma);
  static ScoreKind marginal(const ScoreKind& inner);

  Family family() const { return family_; }
  bool is_marginal() const { return marginal_; }
  double beta() const;
  double gamma() const;

  bool is_kernel_score() const { return family_ != Family::Log; }
  bool strictly_proper() const { return family_ != Family::SquaredError; }

  /// The kernel backing a kernel-score family. Throws for the log score.
  KernelSpec kernel() const;

  /// Canonical flag spelling: log, se, crps, energy:<beta>, gauss:<gamma>,
  /// marginal:<inner>.
  std::string name() const;

  bool operator==(const ScoreKind& other) const = default;

 private:
  ScoreKind(Family family, double param, bool marginal)
      : family_(family), param_(param), marginal_(marginal) {}

  Family family_;
  double param_;
  bool marginal_;
};

/// A score selection whose Gaussian-kernel bandwidth may still be deferred
/// to the median heuristic over data only known later (the gauss:median
/// flag). Consumers resolve `kind` once reference points are available.
struct ScoreSpec {
  ScoreKind kind;
  bool median_gamma = false;
};

/// How expectations inside scores are evaluated.
///
///   ClosedForm  analytic expressions where they exist; falls back to
///               deterministic quadrature (1-D) or seeded Monte Carlo
///               (multivariate energy terms) where they do not, and records
///               the fallback in the diagnostics.
///   MonteCarlo  sample-based unbiased estimation throughout, with an
///               explicit sample count and seed.
///   Quadrature  numeric integration of the defining integrals (univariate
///               distributions only); used for cross-checks.
class EvalPolicy {
 public:
  enum class Mode { ClosedForm, MonteCarlo, Quadrature };

  static EvalPolicy closed_form();
  static EvalPolicy monte_carlo(std::size_t n_samples, std::uint64_t seed);
  static EvalPolicy quadrature(double abs_tol);

  Mode mode() const { return mode_; }
  std::size_t n_samples() const { return n_samples_; }
  std::uint64_t seed() const { return seed_; }
  double abs_tol() const { return abs_tol_; }

  /// Same policy but with a reseeded Monte Carlo stream; identity for the
  /// deterministic modes. Batch drivers use this to give each instance or
  /// member pair its own stream.
  EvalPolicy with_stream(std::uint64_t stream) const;

  std::string name() const;

 private:
  EvalPolicy(Mode mode, std::size_t n_samples, std::uint64_t seed,
             double abs_tol)
      : mode_(mode), n_samples_(n_samples), seed_(seed), abs_tol_(abs_tol) {}

  Mode mode_;
  std::size_t n_samples_;
  std::uint64_t seed_;
  double abs_tol_;
};

/// Which evaluation paths a computation actually took, and whether a tiny
/// negative divergence was clamped to zero.
struct EvalDiagnostics {
  bool used_closed_form = false;
  bool used_quadrature = false;
  bool used_monte_carlo = false;
  bool clamped = false;

  void merge(const EvalDiagnostics& other) {
    used_closed_form |= other.used_closed_form;
    used_quadrature |= other.used_quadrature;
    used_monte_carlo |= other.used_monte_carlo;
    clamped |= other.clamped;
  }
};

/// S(p, y). Kernel families return the nonnegative kernel score; the log
/// score returns -log p(y) and requires a density.
double score(const ScoreKind& kind, const EvalPolicy& policy,
             const FirstOrderDist& p, std::span<const double> y,
             EvalDiagnostics* diag = nullptr);
double score(const ScoreKind& kind, const EvalPolicy& policy,
             const FirstOrderDist& p, double y,
             EvalDiagnostics* diag = nullptr);

/// Generalized entropy H(p): the expected score of p against itself. For
/// Empirical distributions the within-sample pair expectation is the
/// unbiased (i != j) pair statistic.
double entropy(const ScoreKind& kind, const EvalPolicy& policy,
               const FirstOrderDist& p, EvalDiagnostics* diag = nullptr);

/// Score divergence D(p, q) = S(p, q) - H(q). For kernel families this is
/// the squared MMD (symmetric, nonnegative); for the log score it is
/// KL(q || p). Deterministic paths clamp values in [-1e-10, 0) to zero and
/// reject anything more negative; sample-based paths return the unbiased
/// estimate as-is, which may be slightly negative.
double divergence(const ScoreKind& kind, const EvalPolicy& policy,
                  const FirstOrderDist& p, const FirstOrderDist& q,
                  EvalDiagnostics* diag = nullptr);

/// Expected score S(p, q) = D(p, q) + H(q): the mean of S(p, Y) under Y ~ q.
double expected_score(const ScoreKind& kind, const EvalPolicy& policy,
                      const FirstOrderDist& p, const FirstOrderDist& q,
                      EvalDiagnostics* diag = nullptr);

/// E|Z| for Z ~ N(mean, var), in the erf form
/// sqrt(var) * sqrt(2/pi) * exp(-mean^2 / (2 var)) + mean * erf(mean / sqrt(2 var)).
/// This is the absolute-moment building block of the CRPS closed forms;
/// var = 0 returns |mean|.
double crps_gaussian_mean_abs(double mean, double var);

/// A Monte Carlo estimate with its estimated standard error.
struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Unbiased sample-based estimates of entropy and divergence with standard
/// errors. Kernel families pair the drawn samples disjointly so the averaged
/// terms are i.i.d. and the estimator stays unbiased at O(n) cost; the log
/// score averages surprisals. `n_samples` counts draws per distribution.
McEstimate mc_entropy(const ScoreKind& kind, const FirstOrderDist& p,
                      std::size_t n_samples, std::uint64_t seed);
McEstimate mc_divergence(const ScoreKind& kind, const FirstOrderDist& p,
                         const FirstOrderDist& q, std::size_t n_samples,
                         std::uint64_t seed);
McEstimate mc_score(const ScoreKind& kind, const FirstOrderDist& p,
                    std::span<const double> y, std::size_t n_samples,
                    std::uint64_t seed);

}  // namespace kscore

#endif  // KSCORE_SCORES_HPP
