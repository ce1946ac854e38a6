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

#ifndef KSCORE_STATS_HPP
#define KSCORE_STATS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kscore {

/// Neumaier compensated accumulator. Reductions over ensemble members and
/// member pairs use this so results do not depend on summation order at the
/// tolerances the decomposition identities are tested at.
class Accumulator {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t count = 0;
};

/// Sample mean and standard error of the mean.
MeanStderr mean_stderr(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Midranks (average rank for ties), 1-based.
std::vector<double> midranks(std::span<const double> values);

/// Area under the ROC curve of `score` as a classifier for `positive`,
/// computed from midranks (tie-aware Mann-Whitney form).
double auroc(std::span<const double> score,
             std::span<const std::uint8_t> positive);

/// Spearman rank correlation.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace kscore

#endif  // KSCORE_STATS_HPP
