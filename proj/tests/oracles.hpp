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
//
// Test-only oracles, deliberately independent of the library's evaluation
// paths: adaptive Simpson quadrature instead of Gauss-Kronrod, and
// std::normal_distribution streams instead of the library sampler.

#ifndef KSCORE_TESTS_ORACLES_HPP
#define KSCORE_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fb, double fm,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-11) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fb, fm, whole, tol, 40);
}

inline double gauss_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) /
         std::sqrt(2.0 * 3.14159265358979323846 * var);
}

/// E[f(Z)] for Z ~ N(mean, var) by quadrature over +-12 sd, split at zero to
/// handle kinked integrands.
inline double gaussian_expect(const std::function<double(double)>& f,
                              double mean, double var, double tol = 1e-11) {
  if (var <= 0.0) return f(mean);
  const double sd = std::sqrt(var);
  const auto g = [&](double z) { return f(z) * gauss_pdf(z, mean, var); };
  const double lo = mean - 12.0 * sd;
  const double hi = mean + 12.0 * sd;
  if (lo < 0.0 && hi > 0.0) {
    return integrate(g, lo, 0.0, tol) + integrate(g, 0.0, hi, tol);
  }
  return integrate(g, lo, hi, tol);
}

struct Gauss1 {
  double mean;
  double var;
};

inline double mixture_pdf(double x, const std::vector<double>& w,
                          const std::vector<Gauss1>& comps) {
  double p = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    p += w[i] * gauss_pdf(x, comps[i].mean, comps[i].var);
  }
  return p;
}

/// Independent normal stream (stdlib distribution over mt19937, unrelated to
/// the library's Box-Muller stream).
class NormalStream {
 public:
  explicit NormalStream(unsigned seed) : gen_(seed) {}
  double operator()(double mean = 0.0, double sd = 1.0) {
    return mean + sd * dist_(gen_);
  }

 private:
  std::mt19937 gen_;
  std::normal_distribution<double> dist_;
};

}  // namespace oracles

#endif  // KSCORE_TESTS_ORACLES_HPP
