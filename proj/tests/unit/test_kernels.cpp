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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "kscore/kernels.hpp"
#include "kscore/rng.hpp"

using namespace kscore;

namespace {

const std::vector<KernelSpec> kAllFamilies = {
    KernelSpec::squared_euclidean(), KernelSpec::power(0.7),
    KernelSpec::power(1.0), KernelSpec::power(1.5), KernelSpec::gaussian(1.3)};

}  // namespace

TEST_CASE("zero displacement evaluates to zero for every family") {
  const std::vector<double> x = {0.3, -1.2};
  for (const auto& ker : kAllFamilies) {
    CHECK(ker.eval(x, x) == 0.0);
  }
}

TEST_CASE("power kernel with beta=1 is the absolute distance") {
  const double x = 0.0, y = 3.0;
  CHECK(KernelSpec::power(1.0).eval({&x, 1}, {&y, 1}) == doctest::Approx(3.0));
}

TEST_CASE("gaussian kernel saturates at one") {
  const double x = 0.0, y = 1e6;
  const double v = KernelSpec::gaussian(1.0).eval({&x, 1}, {&y, 1});
  CHECK(v == doctest::Approx(1.0));
  CHECK(v <= 1.0);
}

TEST_CASE("translation invariance under random shifts") {
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x = {rng.normal(), rng.normal()};
    std::vector<double> y = {rng.normal(), rng.normal()};
    const std::vector<double> h = {rng.normal(), rng.normal()};
    for (const auto& ker : kAllFamilies) {
      const double base = ker.eval(x, y);
      std::vector<double> xs = {x[0] + h[0], x[1] + h[1]};
      std::vector<double> ys = {y[0] + h[0], y[1] + h[1]};
      CHECK(std::abs(ker.eval(xs, ys) - base) <= 1e-12 * (1.0 + std::abs(base)));
    }
  }
}

TEST_CASE("power family is homogeneous of degree beta") {
  Rng rng(12);
  for (double beta : {0.5, 1.0, 1.7}) {
    const auto ker = KernelSpec::power(beta);
    for (int rep = 0; rep < 20; ++rep) {
      const double x = rng.normal(), y = rng.normal();
      const double c = 0.1 + 3.0 * rng.uniform();
      const double cx = c * x, cy = c * y;
      CHECK(ker.eval({&cx, 1}, {&cy, 1}) ==
            doctest::Approx(std::pow(c, beta) * ker.eval({&x, 1}, {&y, 1}))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("outputs are nonnegative; only the gaussian family is bounded") {
  Rng rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const double x = 5.0 * rng.normal(), y = 5.0 * rng.normal();
    for (const auto& ker : kAllFamilies) {
      const double v = ker.eval({&x, 1}, {&y, 1});
      CHECK(v >= 0.0);
      if (ker.family() == KernelSpec::Family::Gaussian) CHECK(v < 1.0);
    }
  }
  CHECK(KernelSpec::gaussian(2.0).bounded());
  CHECK(!KernelSpec::power(1.0).bounded());
  CHECK(!KernelSpec::squared_euclidean().bounded());
}

TEST_CASE("homogeneity metadata") {
  CHECK(KernelSpec::squared_euclidean().homogeneous_degree() == 2.0);
  CHECK(KernelSpec::power(1.3).homogeneous_degree() == 1.3);
  CHECK(!KernelSpec::gaussian(1.0).homogeneous_degree().has_value());
  CHECK(KernelSpec::power(1.3).translation_invariant());
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(KernelSpec::power(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::power(2.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::power(2.5), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), std::invalid_argument);
}

TEST_CASE("dimension mismatch is rejected") {
  const std::vector<double> x = {0.0, 1.0};
  const std::vector<double> y = {0.0};
  CHECK_THROWS_AS(KernelSpec::power(1.0).eval(x, y), std::invalid_argument);
}

TEST_CASE("median heuristic on small point sets") {
  // {0,1,2}: pairwise distances {1,1,2}, median 1.
  CHECK(median_heuristic(Matrix::column({0.0, 1.0, 2.0})) == 1.0);
  // Single pair.
  CHECK(median_heuristic(Matrix::column({0.0, 10.0})) == 10.0);
  // Even pair count takes the lower median: {0,1,2,3} has distances
  // {1,1,1,2,2,3}, index (6-1)/2 = 2 of the sorted list -> 1.
  CHECK(median_heuristic(Matrix::column({0.0, 1.0, 2.0, 3.0})) == 1.0);
  CHECK_THROWS_AS(median_heuristic(Matrix::column({0.0, 0.0, 0.0})),
                  std::domain_error);
  CHECK_THROWS_AS(median_heuristic(Matrix::column({7.0})),
                  std::invalid_argument);
}

TEST_CASE("bandwidth reference points pool means and samples") {
  std::vector<SecondOrderEnsemble> ensembles;
  ensembles.emplace_back(std::vector<FirstOrderDist>{
      FirstOrderDist::gaussian(0.0, 1.0), FirstOrderDist::gaussian(2.0, 1.0)});
  const auto pts = bandwidth_reference_points(ensembles);
  REQUIRE(pts.rows() == 2);
  CHECK(pts(0, 0) == 0.0);
  CHECK(pts(1, 0) == 2.0);
  CHECK(resolve_median_gamma(ensembles) == doctest::Approx(2.0));

  Matrix s(3, 1);
  s(0, 0) = -1;
  s(1, 0) = 0;
  s(2, 0) = 1;
  ensembles.emplace_back(std::vector<FirstOrderDist>{
      FirstOrderDist::empirical(std::move(s))});
  CHECK(bandwidth_reference_points(ensembles).rows() == 5);
}
