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

#include "kscore/distributions.hpp"
#include "kscore/rng.hpp"
#include "kscore/scores.hpp"

using namespace kscore;

TEST_CASE("sampling a point mass repeats the location") {
  const auto d = FirstOrderDist::point_mass(3.0);
  const auto s = sample(d, 4, 99);
  REQUIRE(s.rows() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s(i, 0) == 3.0);
}

TEST_CASE("standard normal sample mean obeys the CLT bound") {
  const auto d = FirstOrderDist::gaussian(0.0, 1.0);
  const auto s = sample(d, 1000000, 31);
  double mean = 0.0;
  for (double v : s.flat()) mean += v;
  mean /= 1e6;
  CHECK(std::abs(mean) < 0.005);  // 3 sigma / sqrt(n) ~ 0.003
}

TEST_CASE("two-atom mixture sampling hits the mixture mean") {
  const auto d = FirstOrderDist::mixture({0.5, 0.5},
                                         {{{0.0}, {0.0}}, {{2.0}, {0.0}}});
  const auto s = sample(d, 100000, 5);
  double mean = 0.0;
  for (double v : s.flat()) mean += v;
  mean /= 1e5;
  CHECK(std::abs(mean - 1.0) < 0.01);  // 3 sigma / sqrt(n) ~ 0.0095
}

TEST_CASE("equal seeds give bit-identical samples, new seeds move") {
  const auto d = FirstOrderDist::gaussian(1.0, 2.0);
  const auto a = sample(d, 64, 7);
  const auto b = sample(d, 64, 7);
  const auto c = sample(d, 64, 8);
  bool identical = true, moved = false;
  for (std::size_t i = 0; i < 64; ++i) {
    identical = identical && a(i, 0) == b(i, 0);
    moved = moved || a(i, 0) != c(i, 0);
  }
  CHECK(identical);
  CHECK(moved);
}

TEST_CASE("bma of a single member is that member") {
  const SecondOrderEnsemble ens({FirstOrderDist::gaussian(1.0, 2.0)});
  const auto avg = bma(ens);
  REQUIRE(avg.kind() == FirstOrderDist::Kind::Gaussian);
  CHECK(avg.gaussian_params().mean[0] == 1.0);
  CHECK(avg.gaussian_params().var[0] == 2.0);
}

TEST_CASE("bma of two Gaussians is the mean-1 mixture") {
  const SecondOrderEnsemble ens(
      {FirstOrderDist::gaussian(0.0, 1.0), FirstOrderDist::gaussian(2.0, 1.0)});
  const auto avg = bma(ens);
  REQUIRE(avg.kind() == FirstOrderDist::Kind::Mixture);
  const auto mt = mean_and_cov_trace(avg);
  CHECK(mt.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bma of two point masses is a two-atom mixture with mean 1/2") {
  const SecondOrderEnsemble ens(
      {FirstOrderDist::point_mass(0.0), FirstOrderDist::point_mass(1.0)});
  const auto avg = bma(ens);
  REQUIRE(avg.kind() == FirstOrderDist::Kind::Mixture);
  CHECK(mean_and_cov_trace(avg).mean[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("bma mean equals the weighted member means") {
  Rng rng(404);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<FirstOrderDist> members;
    std::vector<double> weights;
    const std::size_t M = 2 + rng.index(5);
    double wsum = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      members.push_back(
          FirstOrderDist::gaussian(4.0 * rng.normal(), 0.1 + rng.uniform()));
      weights.push_back(0.1 + rng.uniform());
      wsum += weights.back();
    }
    for (auto& w : weights) w /= wsum;
    // Pin the trailing weight so the simplex check holds exactly.
    double head = 0.0;
    for (std::size_t m = 0; m + 1 < M; ++m) head += weights[m];
    weights.back() = 1.0 - head;
    const SecondOrderEnsemble ens(members, weights);
    double expected = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      expected += weights[m] * members[m].gaussian_params().mean[0];
    }
    const auto mt = mean_and_cov_trace(bma(ens));
    CHECK(mt.mean[0] == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("moments: Gaussian, mixture via total variance, point mass") {
  const auto g = mean_and_cov_trace(FirstOrderDist::gaussian(2.0, 3.0));
  CHECK(g.mean[0] == 2.0);
  CHECK(g.cov_trace == 3.0);

  const auto m = mean_and_cov_trace(
      FirstOrderDist::mixture({0.5, 0.5}, {{{0.0}, {1.0}}, {{2.0}, {1.0}}}));
  CHECK(m.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.cov_trace == doctest::Approx(2.0).epsilon(1e-14));  // 1 + 1

  const auto p = mean_and_cov_trace(FirstOrderDist::point_mass(5.0));
  CHECK(p.mean[0] == 5.0);
  CHECK(p.cov_trace == 0.0);
}

TEST_CASE("empirical moments use the unbiased variance") {
  Matrix s(2, 1);
  s(0, 0) = 0.0;
  s(1, 0) = 2.0;
  const auto mt = mean_and_cov_trace(FirstOrderDist::empirical(std::move(s)));
  CHECK(mt.mean[0] == 1.0);
  CHECK(mt.cov_trace == 2.0);
}

TEST_CASE("a zero-variance Gaussian is a point mass") {
  const auto d = FirstOrderDist::gaussian(1.5, 0.0);
  REQUIRE(d.kind() == FirstOrderDist::Kind::PointMass);
  CHECK(d.location()[0] == 1.5);

  // Mixture components with zero variance act as atoms: same scores as an
  // explicit atom pair.
  const auto atoms =
      FirstOrderDist::mixture({0.5, 0.5}, {{{0.0}, {0.0}}, {{1.0}, {0.0}}});
  const auto policy = EvalPolicy::closed_form();
  for (const auto& kind :
       {ScoreKind::squared_error(), ScoreKind::crps(),
        ScoreKind::gaussian_kernel(1.0), ScoreKind::energy(1.5)}) {
    const double h = entropy(kind, policy, atoms);
    const double k01 = kind.kernel().eval_r2(1.0);
    CHECK(h == doctest::Approx(0.5 * 0.5 * k01 * 2.0 * 0.5).epsilon(1e-12));
  }
}

TEST_CASE("construction rejects bad inputs") {
  CHECK_THROWS_AS(FirstOrderDist::gaussian({0.0}, {-1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(FirstOrderDist::gaussian({0.0, 1.0}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      FirstOrderDist::mixture({0.6, 0.6}, {{{0.0}, {1.0}}, {{1.0}, {1.0}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      FirstOrderDist::mixture({1.2, -0.2}, {{{0.0}, {1.0}}, {{1.0}, {1.0}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(FirstOrderDist::empirical(Matrix(1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SecondOrderEnsemble({}), std::invalid_argument);
  CHECK_THROWS_AS(
      SecondOrderEnsemble({FirstOrderDist::gaussian(0.0, 1.0)}, {0.5}),
      std::invalid_argument);
}

TEST_CASE("marginals of a diagonal Gaussian and an empirical set") {
  const auto g = FirstOrderDist::gaussian({1.0, 2.0}, {0.5, 4.0});
  const auto g1 = g.marginal(1);
  CHECK(g1.gaussian_params().mean[0] == 2.0);
  CHECK(g1.gaussian_params().var[0] == 4.0);

  Matrix s(3, 2);
  s(0, 0) = 0;
  s(0, 1) = 10;
  s(1, 0) = 1;
  s(1, 1) = 11;
  s(2, 0) = 2;
  s(2, 1) = 12;
  const auto e = FirstOrderDist::empirical(std::move(s));
  const auto e1 = e.marginal(1);
  CHECK(e1.samples()(2, 0) == 12.0);
}

TEST_CASE("shifted and scaled transforms move the moments") {
  const auto g = FirstOrderDist::gaussian(1.0, 2.0);
  const double h = 0.75;
  const auto gs = g.shifted(std::span<const double>(&h, 1));
  CHECK(gs.gaussian_params().mean[0] == doctest::Approx(1.75));
  const auto gc = g.scaled(3.0);
  CHECK(gc.gaussian_params().mean[0] == doctest::Approx(3.0));
  CHECK(gc.gaussian_params().var[0] == doctest::Approx(18.0));
}

TEST_CASE("bma pools equal-size uniform sample sets exactly") {
  Matrix a(2, 1), b(2, 1);
  a(0, 0) = 0;
  a(1, 0) = 1;
  b(0, 0) = 2;
  b(1, 0) = 3;
  const SecondOrderEnsemble ens({FirstOrderDist::empirical(std::move(a)),
                                 FirstOrderDist::empirical(std::move(b))});
  const auto pooled = bma(ens, 1000, 1);
  REQUIRE(pooled.kind() == FirstOrderDist::Kind::Empirical);
  REQUIRE(pooled.samples().rows() == 4);  // concatenated, not resampled
  CHECK(pooled.samples()(3, 0) == 3.0);

  Matrix c(2, 1), d(3, 1);
  c(0, 0) = 0;
  c(1, 0) = 1;
  d(0, 0) = 5;
  d(1, 0) = 6;
  d(2, 0) = 7;
  const SecondOrderEnsemble wens({FirstOrderDist::empirical(std::move(c)),
                                  FirstOrderDist::empirical(std::move(d))},
                                 {0.25, 0.75});
  const auto resampled = bma(wens, 256, 9);
  REQUIRE(resampled.kind() == FirstOrderDist::Kind::Empirical);
  CHECK(resampled.samples().rows() == 256);
}

TEST_CASE("bma of parametric members flattens nested mixtures") {
  const auto mix =
      FirstOrderDist::mixture({0.5, 0.5}, {{{0.0}, {1.0}}, {{4.0}, {1.0}}});
  const SecondOrderEnsemble ens({mix, FirstOrderDist::gaussian(1.0, 2.0)},
                                {0.5, 0.5});
  const auto avg = bma(ens);
  REQUIRE(avg.kind() == FirstOrderDist::Kind::Mixture);
  CHECK(avg.mixture_components().size() == 3);
  CHECK(mean_and_cov_trace(avg).mean[0] == doctest::Approx(1.5));
}
