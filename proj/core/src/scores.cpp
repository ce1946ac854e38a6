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

#include "kscore/scores.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kscore/rng.hpp"
#include "kscore/stats.hpp"

namespace kscore {

namespace {

constexpr double kClampTol = 1e-10;
constexpr double kDefaultQuadTol = 1e-10;
constexpr double kMixtureEntropyQuadTol = 1e-8;
constexpr std::size_t kFallbackMcSamples = 32768;
constexpr std::uint64_t kFallbackMcSeed = 0x6b73636f72654d43ULL;
// Integration windows extend this many standard deviations from the mean;
// the omitted Gaussian mass is ~1e-32.
constexpr double kWindowSds = 12.0;

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, 15, tol);
}

double normal_pdf(double z, double mean, double var) {
  const double d = z - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// ---------------------------------------------------------------------------
// Component decomposition: every first-order distribution is a weighted set
// of diagonal-Gaussian components (atoms have zero variance). Pair
// expectations of translation-invariant kernels then reduce to closed forms
// or one-dimensional integrals per component pair.
// ---------------------------------------------------------------------------

struct Component {
  double weight;
  std::span<const double> mean;
  std::span<const double> var;
};

struct ComponentSet {
  std::vector<Component> comps;
  std::vector<double> zeros;
  bool from_empirical = false;
  std::size_t dim = 0;
};

ComponentSet components_of(const FirstOrderDist& d) {
  ComponentSet set;
  set.dim = d.dim();
  switch (d.kind()) {
    case FirstOrderDist::Kind::Gaussian: {
      const auto& g = d.gaussian_params();
      set.comps.push_back({1.0, g.mean, g.var});
      return set;
    }
    case FirstOrderDist::Kind::PointMass: {
      set.zeros.assign(set.dim, 0.0);
      set.comps.push_back({1.0, d.location(), set.zeros});
      return set;
    }
    case FirstOrderDist::Kind::Mixture: {
      const auto& ws = d.mixture_weights();
      const auto& cs = d.mixture_components();
      for (std::size_t i = 0; i < cs.size(); ++i) {
        set.comps.push_back({ws[i], cs[i].mean, cs[i].var});
      }
      return set;
    }
    case FirstOrderDist::Kind::Empirical: {
      const auto& s = d.samples();
      set.zeros.assign(set.dim, 0.0);
      set.from_empirical = true;
      const double w = 1.0 / static_cast<double>(s.rows());
      set.comps.reserve(s.rows());
      for (std::size_t i = 0; i < s.rows(); ++i) {
        set.comps.push_back({w, s.row(i), set.zeros});
      }
      return set;
    }
  }
  throw std::logic_error("unreachable");
}

ComponentSet atom_of(std::span<const double> y) {
  ComponentSet set;
  set.dim = y.size();
  set.zeros.assign(y.size(), 0.0);
  set.comps.push_back({1.0, y, set.zeros});
  return set;
}

// E k(X, Y) for independent X ~ N(a), Y ~ N(b); Z = X - Y has per-coordinate
// mean delta and variance upsilon.
double pair_mean(const KernelSpec& ker, const Component& a, const Component& b,
                 const EvalPolicy& policy, std::uint64_t stream,
                 EvalDiagnostics* diag) {
  const std::size_t d = a.mean.size();
  double r2 = 0.0;
  double ups_total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double delta = a.mean[j] - b.mean[j];
    r2 += delta * delta;
    ups_total += a.var[j] + b.var[j];
  }
  if (ups_total == 0.0) {
    // Two atoms: the expectation is a single kernel evaluation.
    return ker.eval_r2(r2);
  }

  const bool force_quadrature = policy.mode() == EvalPolicy::Mode::Quadrature;
  if (force_quadrature && d > 1) {
    throw std::invalid_argument(
        "quadrature policy supports univariate distributions only");
  }

  switch (ker.family()) {
    case KernelSpec::Family::SquaredEuclidean: {
      if (!force_quadrature) return r2 + ups_total;
      break;
    }
    case KernelSpec::Family::Gaussian: {
      if (!force_quadrature) {
        const double g2 = ker.gamma() * ker.gamma();
        double prod = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double delta = a.mean[j] - b.mean[j];
          const double ups = a.var[j] + b.var[j];
          const double denom = g2 + 2.0 * ups;
          prod *= std::sqrt(g2 / denom) * std::exp(-delta * delta / denom);
        }
        return 1.0 - prod;
      }
      break;
    }
    case KernelSpec::Family::Power: {
      if (!force_quadrature && d == 1 && ker.beta() == 1.0) {
        return crps_gaussian_mean_abs(a.mean[0] - b.mean[0], ups_total);
      }
      if (d > 1) {
        // No closed form for ||Z||^beta with anisotropic Z; seeded Monte
        // Carlo on Z itself.
        if (diag) diag->used_monte_carlo = true;
        const std::size_t n = policy.mode() == EvalPolicy::Mode::MonteCarlo
                                  ? policy.n_samples()
                                  : kFallbackMcSamples;
        const std::uint64_t seed = derive_seed(kFallbackMcSeed, stream);
        Rng rng(seed);
        std::vector<double> sd(d);
        for (std::size_t j = 0; j < d; ++j) {
          sd[j] = std::sqrt(a.var[j] + b.var[j]);
        }
        Accumulator acc;
        for (std::size_t i = 0; i < n; ++i) {
          double z2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double z = (a.mean[j] - b.mean[j]) + sd[j] * rng.normal();
            z2 += z * z;
          }
          acc.add(std::pow(z2, 0.5 * ker.beta()));
        }
        return acc.total() / static_cast<double>(n);
      }
      break;
    }
  }

  // One-dimensional quadrature of E psi(Z), Z ~ N(delta, upsilon): the
  // quadrature policy for every family, and the general-beta energy case.
  if (diag) diag->used_quadrature = true;
  const double delta = a.mean[0] - b.mean[0];
  const double sd = std::sqrt(ups_total);
  const double tol = policy.mode() == EvalPolicy::Mode::Quadrature
                         ? policy.abs_tol()
                         : kDefaultQuadTol;
  const auto f = [&](double z) {
    return ker.eval_r2(z * z) * normal_pdf(z, delta, ups_total);
  };
  const double lo = delta - kWindowSds * sd;
  const double hi = delta + kWindowSds * sd;
  if (lo < 0.0 && hi > 0.0) {
    // |z|^beta has a kink at zero; integrate the halves separately.
    return integrate(f, lo, 0.0, tol) + integrate(f, 0.0, hi, tol);
  }
  return integrate(f, lo, hi, tol);
}

// E k(X, X') under the distribution behind `set`. For empirical sets the
// unbiased flavor excludes i == j and divides by n(n-1); the plain flavor is
// the expectation under the empirical measure itself (divides by n^2).
double within_pair_mean(const KernelSpec& ker, const ComponentSet& set,
                        const EvalPolicy& policy, EvalDiagnostics* diag,
                        bool unbiased_pairs) {
  const std::size_t m = set.comps.size();
  if (set.from_empirical) {
    Accumulator acc;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        acc.add(ker.eval(set.comps[i].mean, set.comps[j].mean));
      }
    }
    const double n = static_cast<double>(m);
    const double denom = unbiased_pairs ? n * (n - 1.0) : n * n;
    // k(x, x) = 0 for every family, so the diagonal contributes nothing.
    return 2.0 * acc.total() / denom;
  }
  Accumulator acc;
  std::uint64_t stream = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j, ++stream) {
      const double v =
          pair_mean(ker, set.comps[i], set.comps[j], policy, stream, diag);
      const double w = set.comps[i].weight * set.comps[j].weight;
      acc.add((i == j ? 1.0 : 2.0) * w * v);
    }
  }
  return acc.total();
}

// E k(X, Y) for X from `pa`, Y from `pb`, independent.
double cross_pair_mean(const KernelSpec& ker, const ComponentSet& pa,
                       const ComponentSet& pb, const EvalPolicy& policy,
                       EvalDiagnostics* diag) {
  Accumulator acc;
  std::uint64_t stream = 1u << 20;  // disjoint from within-pair streams
  for (const auto& a : pa.comps) {
    for (const auto& b : pb.comps) {
      acc.add(a.weight * b.weight *
              pair_mean(ker, a, b, policy, stream++, diag));
    }
  }
  return acc.total();
}

double finalize_nonnegative(double value, bool stochastic,
                            EvalDiagnostics* diag, const char* what) {
  if (value >= 0.0 || stochastic) return value;
  if (value >= -kClampTol) {
    if (diag) diag->clamped = true;
    return 0.0;
  }
  throw std::runtime_error(std::string("internal consistency: negative ") +
                           what);
}

double kernel_entropy(const KernelSpec& ker, const FirstOrderDist& p,
                      const EvalPolicy& policy, EvalDiagnostics* diag) {
  const auto set = components_of(p);
  // H = (1/2) E k(X, X') - (1/2) E k(X, X); the second term vanishes because
  // k(x, x) = 0 for every supported family.
  return 0.5 * within_pair_mean(ker, set, policy, diag, /*unbiased_pairs=*/true);
}

double kernel_divergence(const KernelSpec& ker, const FirstOrderDist& p,
                         const FirstOrderDist& q, const EvalPolicy& policy,
                         EvalDiagnostics* diag) {
  if (p.dim() != q.dim()) throw std::invalid_argument("dimension mismatch");
  const auto sp = components_of(p);
  const auto sq = components_of(q);
  EvalDiagnostics local;
  const double cross = cross_pair_mean(ker, sp, sq, policy, &local);
  const double wp = within_pair_mean(ker, sp, policy, &local, true);
  const double wq = within_pair_mean(ker, sq, policy, &local, true);
  if (diag) diag->merge(local);
  const bool stochastic =
      local.used_monte_carlo || sp.from_empirical || sq.from_empirical;
  return finalize_nonnegative(cross - 0.5 * wp - 0.5 * wq, stochastic, diag,
                              "divergence");
}

double kernel_score(const KernelSpec& ker, const FirstOrderDist& p,
                    std::span<const double> y, const EvalPolicy& policy,
                    EvalDiagnostics* diag) {
  if (p.dim() != y.size()) throw std::invalid_argument("dimension mismatch");
  const auto sp = components_of(p);
  const auto sy = atom_of(y);
  EvalDiagnostics local;
  const double cross = cross_pair_mean(ker, sp, sy, policy, &local);
  // Plain empirical-measure expectation here (not the unbiased pair
  // statistic): the score of an empirical distribution is the kernel score
  // of the empirical measure itself and stays nonnegative.
  const double wp = within_pair_mean(ker, sp, policy, &local, false);
  if (diag) diag->merge(local);
  // k(y, y) = 0 closes the formula.
  return finalize_nonnegative(cross - 0.5 * wp, local.used_monte_carlo, diag,
                              "score");
}

// ---------------------------------------------------------------------------
// Log score machinery.
// ---------------------------------------------------------------------------

void require_density(const FirstOrderDist& p) {
  if (!p.has_density()) throw std::domain_error("no density");
}

double log_density_value(const FirstOrderDist& p, std::span<const double> y) {
  require_density(p);
  if (y.size() != p.dim()) throw std::invalid_argument("dimension mismatch");
  const auto log_gauss = [](std::span<const double> yy,
                            const GaussianParams& g) {
    double acc = 0.0;
    for (std::size_t j = 0; j < yy.size(); ++j) {
      const double d = yy[j] - g.mean[j];
      acc += -0.5 * std::log(2.0 * std::numbers::pi * g.var[j]) -
             0.5 * d * d / g.var[j];
    }
    return acc;
  };
  if (p.kind() == FirstOrderDist::Kind::Gaussian) {
    return log_gauss(y, p.gaussian_params());
  }
  // Mixture: log-sum-exp over components.
  const auto& ws = p.mixture_weights();
  const auto& cs = p.mixture_components();
  std::vector<double> lw;
  lw.reserve(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (ws[i] <= 0.0) continue;
    lw.push_back(std::log(ws[i]) + log_gauss(y, cs[i]));
  }
  const double m = *std::max_element(lw.begin(), lw.end());
  double s = 0.0;
  for (double v : lw) s += std::exp(v - m);
  return m + std::log(s);
}

struct Interval {
  double lo;
  double hi;
};

// Window containing all but ~1e-32 of the mass of a univariate density.
Interval support_window(const FirstOrderDist& p) {
  if (p.kind() == FirstOrderDist::Kind::Gaussian) {
    const auto& g = p.gaussian_params();
    const double sd = std::sqrt(g.var[0]);
    return {g.mean[0] - kWindowSds * sd, g.mean[0] + kWindowSds * sd};
  }
  const auto& cs = p.mixture_components();
  Interval w{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const auto& c : cs) {
    const double sd = std::sqrt(c.var[0]);
    w.lo = std::min(w.lo, c.mean[0] - kWindowSds * sd);
    w.hi = std::max(w.hi, c.mean[0] + kWindowSds * sd);
  }
  // Hull with the pooled-moment window so low-weight far components and
  // wide mixtures are both covered.
  const auto mt = mean_and_cov_trace(p);
  const double sd = std::sqrt(mt.cov_trace);
  w.lo = std::min(w.lo, mt.mean[0] - kWindowSds * sd);
  w.hi = std::max(w.hi, mt.mean[0] + kWindowSds * sd);
  return w;
}

double log_entropy(const FirstOrderDist& p, const EvalPolicy& policy,
                   EvalDiagnostics* diag);

// E_q[-log p(Y)]: the cross term of the log score.
double log_cross_entropy(const FirstOrderDist& p, const FirstOrderDist& q,
                         const EvalPolicy& policy, EvalDiagnostics* diag) {
  require_density(p);
  if (p.dim() != q.dim()) throw std::invalid_argument("dimension mismatch");
  const std::size_t d = p.dim();

  if (p.kind() == FirstOrderDist::Kind::Gaussian &&
      policy.mode() != EvalPolicy::Mode::Quadrature) {
    // -log p is a quadratic, so only q's first two moments enter.
    const auto& g = p.gaussian_params();
    Accumulator acc;
    for (std::size_t j = 0; j < d; ++j) {
      double second_moment = 0.0;  // E_q[(Y_j - mu_j)^2]
      switch (q.kind()) {
        case FirstOrderDist::Kind::Gaussian: {
          const auto& h = q.gaussian_params();
          const double dm = h.mean[j] - g.mean[j];
          second_moment = h.var[j] + dm * dm;
          break;
        }
        case FirstOrderDist::Kind::PointMass: {
          const double dm = q.location()[j] - g.mean[j];
          second_moment = dm * dm;
          break;
        }
        case FirstOrderDist::Kind::Mixture: {
          const auto& ws = q.mixture_weights();
          const auto& cs = q.mixture_components();
          for (std::size_t i = 0; i < cs.size(); ++i) {
            const double dm = cs[i].mean[j] - g.mean[j];
            second_moment += ws[i] * (cs[i].var[j] + dm * dm);
          }
          break;
        }
        case FirstOrderDist::Kind::Empirical: {
          const auto& s = q.samples();
          Accumulator sm;
          for (std::size_t i = 0; i < s.rows(); ++i) {
            const double dm = s(i, j) - g.mean[j];
            sm.add(dm * dm);
          }
          second_moment = sm.total() / static_cast<double>(s.rows());
          break;
        }
      }
      acc.add(0.5 * std::log(2.0 * std::numbers::pi * g.var[j]) +
              0.5 * second_moment / g.var[j]);
    }
    return acc.total();
  }

  // p is a mixture (or a quadrature cross-check was requested).
  switch (q.kind()) {
    case FirstOrderDist::Kind::PointMass:
      return -log_density_value(p, q.location());
    case FirstOrderDist::Kind::Empirical: {
      const auto& s = q.samples();
      Accumulator acc;
      for (std::size_t i = 0; i < s.rows(); ++i) {
        acc.add(-log_density_value(p, s.row(i)));
      }
      return acc.total() / static_cast<double>(s.rows());
    }
    default:
      break;
  }
  require_density(q);
  if (d == 1) {
    if (diag) diag->used_quadrature = true;
    const double tol = policy.mode() == EvalPolicy::Mode::Quadrature
                           ? policy.abs_tol()
                           : kMixtureEntropyQuadTol;
    const Interval w = support_window(q);
    const auto f = [&](double z) {
      const std::span<const double> zz(&z, 1);
      const double lq = log_density_value(q, zz);
      if (!std::isfinite(lq)) return 0.0;
      return -std::exp(lq) * log_density_value(p, zz);
    };
    return integrate(f, w.lo, w.hi, tol);
  }
  // Multivariate mixture: seeded Monte Carlo fallback.
  if (diag) diag->used_monte_carlo = true;
  const std::size_t n = policy.mode() == EvalPolicy::Mode::MonteCarlo
                            ? policy.n_samples()
                            : kFallbackMcSamples;
  const Matrix ys = sample(q, n, derive_seed(kFallbackMcSeed, 0x107fULL));
  Accumulator acc;
  for (std::size_t i = 0; i < ys.rows(); ++i) {
    acc.add(-log_density_value(p, ys.row(i)));
  }
  return acc.total() / static_cast<double>(ys.rows());
}

double log_entropy(const FirstOrderDist& p, const EvalPolicy& policy,
                   EvalDiagnostics* diag) {
  require_density(p);
  if (p.kind() == FirstOrderDist::Kind::Gaussian &&
      policy.mode() != EvalPolicy::Mode::Quadrature) {
    const auto& g = p.gaussian_params();
    Accumulator acc;
    for (double v : g.var) {
      acc.add(0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * v));
    }
    return acc.total();
  }
  if (p.dim() == 1) {
    if (diag) diag->used_quadrature = true;
    const double tol = policy.mode() == EvalPolicy::Mode::Quadrature
                           ? policy.abs_tol()
                           : kMixtureEntropyQuadTol;
    const Interval w = support_window(p);
    const auto f = [&](double z) {
      const std::span<const double> zz(&z, 1);
      const double lp = log_density_value(p, zz);
      if (!std::isfinite(lp)) return 0.0;
      const double pz = std::exp(lp);
      return pz > 0.0 ? -pz * lp : 0.0;
    };
    return integrate(f, w.lo, w.hi, tol);
  }
  if (diag) diag->used_monte_carlo = true;
  const std::size_t n = policy.mode() == EvalPolicy::Mode::MonteCarlo
                            ? policy.n_samples()
                            : kFallbackMcSamples;
  const Matrix xs = sample(p, n, derive_seed(kFallbackMcSeed, 0x7a11ULL));
  Accumulator acc;
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    acc.add(-log_density_value(p, xs.row(i)));
  }
  return acc.total() / static_cast<double>(xs.rows());
}

// D_log(p, q) = KL(q || p).
double log_divergence(const FirstOrderDist& p, const FirstOrderDist& q,
                      const EvalPolicy& policy, EvalDiagnostics* diag) {
  require_density(p);
  require_density(q);
  if (p.dim() != q.dim()) throw std::invalid_argument("dimension mismatch");
  if (p.kind() == FirstOrderDist::Kind::Gaussian &&
      q.kind() == FirstOrderDist::Kind::Gaussian &&
      policy.mode() != EvalPolicy::Mode::Quadrature) {
    const auto& gp = p.gaussian_params();
    const auto& gq = q.gaussian_params();
    Accumulator acc;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      const double dm = gq.mean[j] - gp.mean[j];
      acc.add(0.5 * std::log(gp.var[j] / gq.var[j]) +
              0.5 * (gq.var[j] + dm * dm) / gp.var[j] - 0.5);
    }
    return acc.total();
  }
  EvalDiagnostics local;
  const double ce = log_cross_entropy(p, q, policy, &local);
  const double h = log_entropy(q, policy, &local);
  if (diag) diag->merge(local);
  return finalize_nonnegative(ce - h, local.used_monte_carlo, diag,
                              "KL divergence");
}

ScoreKind strip_marginal(const ScoreKind& kind) {
  switch (kind.family()) {
    case ScoreKind::Family::Log:
      return ScoreKind::log_score();
    case ScoreKind::Family::SquaredError:
      return ScoreKind::squared_error();
    case ScoreKind::Family::Energy:
      return ScoreKind::energy(kind.beta());
    case ScoreKind::Family::GaussianKernel:
      return ScoreKind::gaussian_kernel(kind.gamma());
  }
  throw std::logic_error("unreachable");
}

}  // namespace

// ---------------------------------------------------------------------------
// ScoreKind / EvalPolicy
// ---------------------------------------------------------------------------

ScoreKind ScoreKind::log_score() { return ScoreKind(Family::Log, 0.0, false); }

ScoreKind ScoreKind::squared_error() {
  return ScoreKind(Family::SquaredError, 2.0, false);
}

ScoreKind ScoreKind::energy(double beta) {
  if (beta == 2.0) return squared_error();
  if (!(beta > 0.0) || !(beta < 2.0)) {
    throw std::invalid_argument("energy score: beta must lie in (0, 2]");
  }
  return ScoreKind(Family::Energy, beta, false);
}

ScoreKind ScoreKind::gaussian_kernel(double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gaussian kernel score: gamma must be positive");
  }
  return ScoreKind(Family::GaussianKernel, gamma, false);
}

ScoreKind ScoreKind::marginal(const ScoreKind& inner) {
  if (inner.is_marginal()) {
    throw std::invalid_argument("marginal score: inner rule must be univariate");
  }
  return ScoreKind(inner.family_, inner.param_, true);
}

double ScoreKind::beta() const {
  if (family_ != Family::Energy && family_ != Family::SquaredError) {
    throw std::logic_error("beta only defined for energy-type scores");
  }
  return param_;
}

double ScoreKind::gamma() const {
  if (family_ != Family::GaussianKernel) {
    throw std::logic_error("gamma only defined for the Gaussian kernel score");
  }
  return param_;
}

KernelSpec ScoreKind::kernel() const {
  switch (family_) {
    case Family::SquaredError:
      return KernelSpec::squared_euclidean();
    case Family::Energy:
      return KernelSpec::power(param_);
    case Family::GaussianKernel:
      return KernelSpec::gaussian(param_);
    case Family::Log:
      throw std::logic_error("the log score is not a kernel score");
  }
  throw std::logic_error("unreachable");
}

std::string ScoreKind::name() const {
  std::string base;
  switch (family_) {
    case Family::Log:
      base = "log";
      break;
    case Family::SquaredError:
      base = "se";
      break;
    case Family::Energy:
      base = param_ == 1.0 ? "crps" : "energy:" + format_param(param_);
      break;
    case Family::GaussianKernel:
      base = "gauss:" + format_param(param_);
      break;
  }
  return marginal_ ? "marginal:" + base : base;
}

EvalPolicy EvalPolicy::closed_form() {
  return EvalPolicy(Mode::ClosedForm, 0, 0, kDefaultQuadTol);
}

EvalPolicy EvalPolicy::monte_carlo(std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) {
    throw std::invalid_argument("monte carlo policy: n_samples must be >= 2");
  }
  return EvalPolicy(Mode::MonteCarlo, n_samples, seed, kDefaultQuadTol);
}

EvalPolicy EvalPolicy::quadrature(double abs_tol) {
  if (!(abs_tol > 0.0)) {
    throw std::invalid_argument("quadrature policy: abs_tol must be positive");
  }
  return EvalPolicy(Mode::Quadrature, 0, 0, abs_tol);
}

EvalPolicy EvalPolicy::with_stream(std::uint64_t stream) const {
  if (mode_ != Mode::MonteCarlo) return *this;
  return EvalPolicy(mode_, n_samples_, derive_seed(seed_, stream), abs_tol_);
}

std::string EvalPolicy::name() const {
  switch (mode_) {
    case Mode::ClosedForm:
      return "closed";
    case Mode::MonteCarlo:
      return "mc:" + std::to_string(n_samples_) + ":" + std::to_string(seed_);
    case Mode::Quadrature:
      return "quad:" + format_param(abs_tol_);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

double crps_gaussian_mean_abs(double mean, double var) {
  if (!(var > 0.0)) return std::abs(mean);
  const double sd = std::sqrt(var);
  return sd * std::sqrt(2.0 / std::numbers::pi) *
             std::exp(-0.5 * mean * mean / var) +
         mean * std::erf(mean / (sd * std::numbers::sqrt2));
}

double entropy(const ScoreKind& kind, const EvalPolicy& policy,
               const FirstOrderDist& p, EvalDiagnostics* diag) {
  if (kind.is_marginal()) {
    const ScoreKind inner = strip_marginal(kind);
    Accumulator acc;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      acc.add(entropy(inner, policy.with_stream(j), p.marginal(j), diag));
    }
    return acc.total();
  }
  if (policy.mode() == EvalPolicy::Mode::MonteCarlo) {
    if (diag) diag->used_monte_carlo = true;
    return mc_entropy(kind, p, policy.n_samples(), policy.seed()).value;
  }
  EvalDiagnostics local;
  double v;
  if (kind.family() == ScoreKind::Family::Log) {
    v = log_entropy(p, policy, &local);
  } else {
    v = kernel_entropy(kind.kernel(), p, policy, &local);
  }
  if (!local.used_quadrature && !local.used_monte_carlo) {
    local.used_closed_form = true;
  }
  if (diag) diag->merge(local);
  return v;
}

double divergence(const ScoreKind& kind, const EvalPolicy& policy,
                  const FirstOrderDist& p, const FirstOrderDist& q,
                  EvalDiagnostics* diag) {
  if (kind.is_marginal()) {
    const ScoreKind inner = strip_marginal(kind);
    if (p.dim() != q.dim()) throw std::invalid_argument("dimension mismatch");
    Accumulator acc;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      acc.add(divergence(inner, policy.with_stream(j), p.marginal(j),
                         q.marginal(j), diag));
    }
    return acc.total();
  }
  if (policy.mode() == EvalPolicy::Mode::MonteCarlo) {
    if (diag) diag->used_monte_carlo = true;
    return mc_divergence(kind, p, q, policy.n_samples(), policy.seed()).value;
  }
  EvalDiagnostics local;
  double v;
  if (kind.family() == ScoreKind::Family::Log) {
    v = log_divergence(p, q, policy, &local);
  } else {
    v = kernel_divergence(kind.kernel(), p, q, policy, &local);
  }
  if (!local.used_quadrature && !local.used_monte_carlo) {
    local.used_closed_form = true;
  }
  if (diag) diag->merge(local);
  return v;
}

double expected_score(const ScoreKind& kind, const EvalPolicy& policy,
                      const FirstOrderDist& p, const FirstOrderDist& q,
                      EvalDiagnostics* diag) {
  const double d = divergence(kind, policy.with_stream(0xd1), p, q, diag);
  const double h = entropy(kind, policy.with_stream(0xe1), q, diag);
  return d + h;
}

double score(const ScoreKind& kind, const EvalPolicy& policy,
             const FirstOrderDist& p, std::span<const double> y,
             EvalDiagnostics* diag) {
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("score: observation must be finite");
    }
  }
  if (kind.is_marginal()) {
    const ScoreKind inner = strip_marginal(kind);
    if (p.dim() != y.size()) throw std::invalid_argument("dimension mismatch");
    Accumulator acc;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      acc.add(score(inner, policy.with_stream(j), p.marginal(j),
                    std::span<const double>(&y[j], 1), diag));
    }
    return acc.total();
  }
  if (kind.family() == ScoreKind::Family::Log) {
    EvalDiagnostics local;
    local.used_closed_form = true;
    if (diag) diag->merge(local);
    return -log_density_value(p, y);
  }
  if (policy.mode() == EvalPolicy::Mode::MonteCarlo) {
    if (diag) diag->used_monte_carlo = true;
    return mc_score(kind, p, y, policy.n_samples(), policy.seed()).value;
  }
  EvalDiagnostics local;
  const double v = kernel_score(kind.kernel(), p, y, policy, &local);
  if (!local.used_quadrature && !local.used_monte_carlo) {
    local.used_closed_form = true;
  }
  if (diag) diag->merge(local);
  return v;
}

double score(const ScoreKind& kind, const EvalPolicy& policy,
             const FirstOrderDist& p, double y, EvalDiagnostics* diag) {
  return score(kind, policy, p, std::span<const double>(&y, 1), diag);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators
// ---------------------------------------------------------------------------

namespace {

// Mean kernel value over disjoint sample pairs: each term is an independent
// draw of k(X, X'), so the average is unbiased and the terms admit a direct
// standard error.
MeanStderr paired_kernel_mean(const KernelSpec& ker, const Matrix& xs) {
  const std::size_t pairs = xs.rows() / 2;
  std::vector<double> terms(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    terms[i] = ker.eval(xs.row(2 * i), xs.row(2 * i + 1));
  }
  return mean_stderr(terms);
}

MeanStderr crossed_kernel_mean(const KernelSpec& ker, const Matrix& xs,
                               const Matrix& ys) {
  std::vector<double> terms(xs.rows());
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    terms[i] = ker.eval(xs.row(i), ys.row(i));
  }
  return mean_stderr(terms);
}

}  // namespace

McEstimate mc_entropy(const ScoreKind& kind, const FirstOrderDist& p,
                      std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) {
    throw std::invalid_argument("mc_entropy: n_samples must be >= 2");
  }
  if (kind.is_marginal()) {
    const ScoreKind inner = strip_marginal(kind);
    McEstimate out;
    double var = 0.0;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      const auto e =
          mc_entropy(inner, p.marginal(j), n_samples, derive_seed(seed, j));
      out.value += e.value;
      var += e.standard_error * e.standard_error;
    }
    out.standard_error = std::sqrt(var);
    return out;
  }
  if (kind.family() == ScoreKind::Family::Log) {
    require_density(p);
    const Matrix xs = sample(p, n_samples, seed);
    std::vector<double> terms(xs.rows());
    for (std::size_t i = 0; i < xs.rows(); ++i) {
      terms[i] = -log_density_value(p, xs.row(i));
    }
    const auto ms = mean_stderr(terms);
    return {ms.mean, ms.stderr_of_mean};
  }
  const KernelSpec ker = kind.kernel();
  const Matrix xs = sample(p, n_samples, seed);
  const auto ms = paired_kernel_mean(ker, xs);
  return {0.5 * ms.mean, 0.5 * ms.stderr_of_mean};
}

McEstimate mc_divergence(const ScoreKind& kind, const FirstOrderDist& p,
                         const FirstOrderDist& q, std::size_t n_samples,
                         std::uint64_t seed) {
  if (n_samples < 2) {
    throw std::invalid_argument("mc_divergence: n_samples must be >= 2");
  }
  if (p.dim() != q.dim()) throw std::invalid_argument("dimension mismatch");
  if (kind.is_marginal()) {
    const ScoreKind inner = strip_marginal(kind);
    McEstimate out;
    double var = 0.0;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      const auto e = mc_divergence(inner, p.marginal(j), q.marginal(j),
                                   n_samples, derive_seed(seed, j));
      out.value += e.value;
      var += e.standard_error * e.standard_error;
    }
    out.standard_error = std::sqrt(var);
    return out;
  }
  if (kind.family() == ScoreKind::Family::Log) {
    require_density(p);
    require_density(q);
    const Matrix ys = sample(q, n_samples, seed);
    std::vector<double> terms(ys.rows());
    for (std::size_t i = 0; i < ys.rows(); ++i) {
      terms[i] = log_density_value(q, ys.row(i)) - log_density_value(p, ys.row(i));
    }
    const auto ms = mean_stderr(terms);
    return {ms.mean, ms.stderr_of_mean};
  }
  const KernelSpec ker = kind.kernel();
  const Matrix xc = sample(p, n_samples, derive_seed(seed, 1));
  const Matrix yc = sample(q, n_samples, derive_seed(seed, 2));
  const Matrix xw = sample(p, n_samples, derive_seed(seed, 3));
  const Matrix yw = sample(q, n_samples, derive_seed(seed, 4));
  const auto cross = crossed_kernel_mean(ker, xc, yc);
  const auto wp = paired_kernel_mean(ker, xw);
  const auto wq = paired_kernel_mean(ker, yw);
  McEstimate out;
  out.value = cross.mean - 0.5 * wp.mean - 0.5 * wq.mean;
  out.standard_error = std::sqrt(
      cross.stderr_of_mean * cross.stderr_of_mean +
      0.25 * wp.stderr_of_mean * wp.stderr_of_mean +
      0.25 * wq.stderr_of_mean * wq.stderr_of_mean);
  return out;
}

McEstimate mc_score(const ScoreKind& kind, const FirstOrderDist& p,
                    std::span<const double> y, std::size_t n_samples,
                    std::uint64_t seed) {
  if (n_samples < 2) {
    throw std::invalid_argument("mc_score: n_samples must be >= 2");
  }
  if (kind.is_marginal()) {
    const ScoreKind inner = strip_marginal(kind);
    McEstimate out;
    double var = 0.0;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      const auto e = mc_score(inner, p.marginal(j),
                              std::span<const double>(&y[j], 1), n_samples,
                              derive_seed(seed, j));
      out.value += e.value;
      var += e.standard_error * e.standard_error;
    }
    out.standard_error = std::sqrt(var);
    return out;
  }
  if (kind.family() == ScoreKind::Family::Log) {
    return {-log_density_value(p, y), 0.0};
  }
  const KernelSpec ker = kind.kernel();
  const Matrix xc = sample(p, n_samples, derive_seed(seed, 1));
  const Matrix xw = sample(p, n_samples, derive_seed(seed, 2));
  std::vector<double> terms(xc.rows());
  for (std::size_t i = 0; i < xc.rows(); ++i) {
    terms[i] = ker.eval(xc.row(i), y);
  }
  const auto cross = mean_stderr(terms);
  const auto within = paired_kernel_mean(ker, xw);
  McEstimate out;
  out.value = cross.mean - 0.5 * within.mean;
  out.standard_error =
      std::sqrt(cross.stderr_of_mean * cross.stderr_of_mean +
                0.25 * within.stderr_of_mean * within.stderr_of_mean);
  return out;
}

}  // namespace kscore
