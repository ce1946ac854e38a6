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

#include "kscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kscore {

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  out.count = values.size();
  if (values.empty()) return out;
  Accumulator acc;
  for (double v : values) acc.add(v);
  out.mean = acc.total() / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  Accumulator ss;
  for (double v : values) {
    const double d = v - out.mean;
    ss.add(d * d);
  }
  const double var = ss.total() / static_cast<double>(values.size() - 1);
  out.stderr_of_mean = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit requires two equal-length series");
  }
  const double n = static_cast<double>(x.size());
  Accumulator sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.total() / n;
  const double my = sy.total() / n;
  Accumulator sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.total() == 0.0) {
    throw std::invalid_argument("linear_fit: degenerate abscissae");
  }
  LinearFit fit;
  fit.slope = sxy.total() / sxx.total();
  fit.intercept = my - fit.slope * mx;
  return fit;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double auroc(std::span<const double> score,
             std::span<const std::uint8_t> positive) {
  if (score.size() != positive.size() || score.empty()) {
    throw std::invalid_argument("auroc: mismatched or empty inputs");
  }
  const auto ranks = midranks(score);
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (positive[i]) {
      rank_sum += ranks[i];
      ++n_pos;
    }
  }
  const std::size_t n_neg = score.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("auroc: needs both classes");
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman requires two equal-length series");
  }
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("spearman: constant series");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace kscore
