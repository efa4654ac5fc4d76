// Copyright 2026 The sngd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sngd/error.hpp"
#include "sngd/targets.hpp"
#include "unit/test_support.hpp"

using namespace sngd;
using namespace sngd::targets;
using sngd::testing::rel_err;

namespace {

using Index = Eigen::Index;

Mat corr_of(const Mat& s) {
  const Vec d = s.diagonal().cwiseSqrt().cwiseInverse();
  Mat r = d.asDiagonal() * s * d.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

Vec flat_matrix(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Vec random_block(const TargetDescriptor& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = t.dim();
  switch (t.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture:
      return Vec{{0.5 + 7.5 * u(rng), 0.1 + 0.8 * u(rng)}};
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture: {
      Vec out(2 * d + d * d);
      out << sngd::testing::random_vec(d, rng), flat_matrix(sngd::testing::random_spd(d, rng, 0.5)),
          sngd::testing::random_vec(d, rng);
      return out;
    }
    case TargetKind::kNormal: {
      Vec out(d + d * d);
      out << sngd::testing::random_vec(d, rng), flat_matrix(sngd::testing::random_spd(d, rng, 0.5));
      return out;
    }
    case TargetKind::kGaussianCopula:
      return flat_matrix(corr_of(sngd::testing::random_spd(d, rng, 0.5)));
    case TargetKind::kTCopula: {
      Vec out(d * d + 1);
      out << flat_matrix(corr_of(sngd::testing::random_spd(d, rng, 0.5))), 3.0 + 27.0 * u(rng);
      return out;
    }
  }
  return Vec();
}

Vec random_params(const TargetDescriptor& t, std::mt19937_64& rng) {
  if (!t.is_mixture()) return random_block(t, rng);
  const int k = t.components();
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Vec out(t.flat_size());
  for (int j = 0; j < k; ++j) out[j] = u(rng);
  out.head(k) /= out.head(k).sum();
  for (int j = 0; j < k; ++j) out.segment(k + j * t.block_size(), t.block_size()) = random_block(t, rng);
  return out;
}

// Tangent directions that keep symmetric blocks symmetric, copula diagonals
// at one and mixture weights on the simplex.
Vec random_direction(const TargetDescriptor& t, std::mt19937_64& rng) {
  const int d = t.dim();
  auto block = [&]() {
    Vec v = sngd::testing::random_vec(t.block_size(), rng);
    switch (t.kind()) {
      case TargetKind::kSkewNormal:
      case TargetKind::kSkewNormalMixture:
      case TargetKind::kNormal:
        v.segment(d, d * d) = flat_matrix(sngd::testing::random_symmetric(d, rng));
        break;
      case TargetKind::kGaussianCopula:
      case TargetKind::kTCopula: {
        Mat s = sngd::testing::random_symmetric(d, rng);
        s.diagonal().setZero();
        v.head(d * d) = flat_matrix(s);
        break;
      }
      default:
        break;
    }
    return v;
  };
  if (!t.is_mixture()) return block();
  const int k = t.components();
  Vec out(t.flat_size());
  out.head(k) = sngd::testing::random_vec(k, rng);
  out.head(k).array() -= out.head(k).mean();
  for (int j = 0; j < k; ++j) out.segment(k + j * t.block_size(), t.block_size()) = block();
  return out;
}

std::vector<TargetDescriptor> all_targets() {
  return {TargetDescriptor::negbin(),          TargetDescriptor::negbin_mixture(3),
          TargetDescriptor::skew_normal(3),    TargetDescriptor::skew_normal_mixture(2, 2),
          TargetDescriptor::gaussian_copula(3), TargetDescriptor::t_copula(3),
          TargetDescriptor::normal(2)};
}

double normal_logpdf_oracle(const Vec& x, const Vec& m, const Mat& s) {
  const Vec r = x - m;
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2 * std::numbers::pi) - 0.5 * std::log(s.determinant()) -
         0.5 * r.dot(s.inverse() * r);
}

}  // namespace

TEST_CASE("negbin examples") {
  CHECK(std::fabs(negbin_logpmf_grad({2.0, 0.5}, 0.0).value - 2.0 * std::log(0.5)) < 1e-15);
  CHECK(std::fabs(negbin_logpmf_grad({2.0, 0.5}, 0.0).value + 1.386294) < 1e-6);
  for (double x : {0.0, 1.0, 5.0, 17.0}) {
    CHECK(std::fabs(negbin_logpmf_grad({1.0, 0.35}, x).value - (x * std::log(0.65) + std::log(0.35))) < 1e-12);
  }
  const boost::math::negative_binomial_distribution<double> ref(2.5, 0.3);
  CHECK(std::fabs(negbin_logpmf_grad({2.5, 0.3}, 4.0).value - std::log(boost::math::pdf(ref, 4.0))) < 1e-12);

  const auto e = negbin_logpmf_grad({2.5, 0.3}, 4.0);
  const Vec fd = sngd::testing::fd_gradient(
      [](const Vec& p) { return negbin_logpmf_grad({p[0], p[1]}, 4.0).value; }, Vec{{2.5, 0.3}}, 1e-6);
  CHECK(rel_err(e.grad, fd) < 1e-6);
  CHECK_THROWS_AS(negbin_logpmf_grad({2.0, 1.0}, 1.0), DomainError);
  CHECK_THROWS_AS(negbin_logpmf_grad({-1.0, 0.5}, 1.0), DomainError);
  CHECK_THROWS_AS(negbin_logpmf_grad({2.0, 0.5}, 1.5), DomainError);
}

TEST_CASE("negbin pmf sums to one") {
  for (auto p : {NegBinParams{4.0, 0.4}, NegBinParams{0.7, 0.9}, NegBinParams{30.0, 0.2}}) {
    double total = 0.0;
    for (double x = 0.0;; x += 1.0) {
      const double pmf = std::exp(negbin_logpmf_grad(p, x).value);
      total += pmf;
      if (x > p.r * (1 - p.s) / p.s && pmf < 1e-12) break;
    }
    CHECK(std::fabs(total - 1.0) < 1e-3);
  }
}

TEST_CASE("skew-normal reduces to the normal at zero slant") {
  std::mt19937_64 rng(11);
  const Vec xi = sngd::testing::random_vec(3, rng);
  const Mat omega = sngd::testing::random_spd(3, rng);
  for (int i = 0; i < 5; ++i) {
    const Vec x = sngd::testing::random_vec(3, rng);
    const double got = skewnormal_logpdf_grad({xi, omega, Vec::Zero(3)}, x).value;
    CHECK(std::fabs(got - normal_logpdf_oracle(x, xi, omega)) < 1e-12);
  }
}

TEST_CASE("skew-normal reflection identity") {
  std::mt19937_64 rng(12);
  const Vec xi = sngd::testing::random_vec(3, rng), eta = sngd::testing::random_vec(3, rng);
  const Mat omega = sngd::testing::random_spd(3, rng);
  for (int i = 0; i < 5; ++i) {
    const Vec u = sngd::testing::random_vec(3, rng);
    const double a = skewnormal_logpdf_grad({xi, omega, eta}, xi + u).value;
    const double b = skewnormal_logpdf_grad({xi, omega, -eta}, xi - u).value;
    CHECK(std::fabs(a - b) < 1e-12);
  }
}

TEST_CASE("skew-normal density integrates to one in one dimension") {
  const SkewNormalParams p{Vec{{0.4}}, Mat::Constant(1, 1, 2.0), Vec{{3.0}}};
  const double total = sngd::testing::simpson(
      [&](double x) { return std::exp(skewnormal_logpdf_grad(p, Vec{{x}}).value); }, -20.0, 20.0, 8000);
  CHECK(std::fabs(total - 1.0) < 1e-3);
}

TEST_CASE("skew-normal gradients match finite differences") {
  std::mt19937_64 rng(13);
  const auto t = TargetDescriptor::skew_normal(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec theta = random_params(t, rng);
    const Vec x = sngd::testing::random_vec(3, rng);
    const auto e = log_likelihood(t, theta, x.transpose());
    for (int probe = 0; probe < 4; ++probe) {
      const Vec v = random_direction(t, rng);
      const double fd = sngd::testing::fd_slope(
          [&](const Vec& th) { return log_likelihood(t, th, x.transpose(), Vec(), false).value; }, theta, v);
      CHECK(std::fabs(fd - e.grad.dot(v)) <= 1e-5 * std::max(1.0, std::fabs(fd)));
    }
    // The Ω block is symmetric.
    const Mat g = Eigen::Map<const Mat>(e.grad.data() + 3, 3, 3);
    CHECK((g - g.transpose()).norm() < 1e-14);
  }
}

TEST_CASE("single-component mixtures match the component") {
  const auto mix = MixtureTargetParams<NegBinParams>{Vec{{1.0}}, {NegBinParams{3.0, 0.3}}};
  for (double x : {0.0, 2.0, 11.0}) {
    const auto a = negbin_mixture_logpmf_grad(mix, x);
    const auto b = negbin_logpmf_grad({3.0, 0.3}, x);
    CHECK(std::fabs(a.value - b.value) < 1e-14);
    CHECK((a.grad.tail(2) - b.grad).norm() < 1e-14);
  }
}

TEST_CASE("identical components make the weights irrelevant") {
  const NegBinParams c{3.0, 0.3};
  for (double w : {0.1, 0.5, 0.8}) {
    const auto e = negbin_mixture_logpmf_grad({Vec{{w, 1.0 - w}}, {c, c}}, 4.0);
    CHECK(std::fabs(e.value - negbin_logpmf_grad(c, 4.0).value) < 1e-14);
    CHECK(std::fabs(e.grad[0] - e.grad[1]) < 1e-12);
  }
}

TEST_CASE("negbin mixture gradients match finite differences") {
  std::mt19937_64 rng(14);
  const auto t = TargetDescriptor::negbin_mixture(3);
  const Vec theta = random_params(t, rng);
  const Mat x = sample(t, theta, 30, 7u);
  const auto e = log_likelihood(t, theta, x);
  for (int probe = 0; probe < 10; ++probe) {
    const Vec v = random_direction(t, rng);
    const double fd = sngd::testing::fd_slope(
        [&](const Vec& th) { return log_likelihood(t, th, x, Vec(), false).value; }, theta, v, 1e-6);
    CHECK(std::fabs(fd - e.grad.dot(v)) <= 1e-6 * std::max(1.0, std::fabs(fd)));
  }
}

TEST_CASE("gaussian copula examples") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::fabs(gaussian_copula_logpdf_grad(Mat::Identity(3, 3), Vec{{u(rng), u(rng), u(rng)}}).value) < 1e-14);
  }
  const Mat r{{1.0, 0.5}, {0.5, 1.0}};
  const double got = gaussian_copula_logpdf_grad(r, Vec{{0.5, 0.5}}).value;
  CHECK(std::fabs(got + 0.5 * std::log(0.75)) < 1e-14);
  CHECK(std::fabs(got - 0.143841) < 1e-6);
  CHECK_THROWS_AS(gaussian_copula_logpdf_grad(r, Vec{{0.0, 0.5}}), DomainError);
  CHECK_THROWS_AS(gaussian_copula_logpdf_grad(r, Vec{{0.5, 1.0}}), DomainError);
  CHECK_THROWS_AS(gaussian_copula_logpdf_grad(Mat{{2.0, 0.5}, {0.5, 1.0}}, Vec{{0.5, 0.5}}), DomainError);

  // Against the bivariate normal density divided by its marginals.
  const Vec uu{{0.2, 0.7}};
  const boost::math::normal_distribution<double> std_normal;
  const Vec z{{boost::math::quantile(std_normal, uu[0]), boost::math::quantile(std_normal, uu[1])}};
  const double want = normal_logpdf_oracle(z, Vec::Zero(2), r) - std::log(boost::math::pdf(std_normal, z[0])) -
                      std::log(boost::math::pdf(std_normal, z[1]));
  CHECK(std::fabs(gaussian_copula_logpdf_grad(r, uu).value - want) < 1e-12);
}

TEST_CASE("t copula examples") {
  for (double nu : {2.5, 7.0, 40.0}) {
    for (double u : {0.02, 0.4, 0.93}) {
      CHECK(std::fabs(t_copula_logpdf_grad({Mat::Identity(1, 1), nu}, Vec{{u}}).value) < 1e-10);
    }
  }
  std::mt19937_64 rng(16);
  const Mat r = corr_of(sngd::testing::random_spd(3, rng, 0.5));
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int i = 0; i < 5; ++i) {
    const Vec u{{unif(rng), unif(rng), unif(rng)}};
    CHECK(std::fabs(t_copula_logpdf_grad({Mat::Identity(3, 3), 1e6}, u).value -
                    gaussian_copula_logpdf_grad(Mat::Identity(3, 3), u).value) < 1e-3);
    CHECK(std::fabs(t_copula_logpdf_grad({r, 1e6}, u).value - gaussian_copula_logpdf_grad(r, u).value) < 1e-3);
  }

  // Against Boost's t distribution for the univariate pieces.
  const double nu = 5.0;
  const Mat r2{{1.0, -0.3}, {-0.3, 1.0}};
  const Vec u{{0.15, 0.8}};
  const boost::math::students_t_distribution<double> t(nu);
  const Vec z{{boost::math::quantile(t, u[0]), boost::math::quantile(t, u[1])}};
  const double q = z.dot(r2.inverse() * z);
  const double joint = std::lgamma((nu + 2) / 2) - std::lgamma(nu / 2) - std::log(nu * std::numbers::pi) -
                       0.5 * std::log(r2.determinant()) - 0.5 * (nu + 2) * std::log1p(q / nu);
  const double want = joint - std::log(boost::math::pdf(t, z[0])) - std::log(boost::math::pdf(t, z[1]));
  CHECK(std::fabs(t_copula_logpdf_grad({r2, nu}, u).value - want) < 1e-10);
}

TEST_CASE("copula gradients match finite differences") {
  std::mt19937_64 rng(17);
  for (const auto& t : {TargetDescriptor::gaussian_copula(3), TargetDescriptor::t_copula(3)}) {
    CAPTURE(t.name());
    for (int trial = 0; trial < 3; ++trial) {
      const Vec theta = random_params(t, rng);
      const Mat x = sample(t, theta, 20, rng);
      const auto e = log_likelihood(t, theta, x);
      for (int probe = 0; probe < 4; ++probe) {
        const Vec v = random_direction(t, rng);
        const double fd = sngd::testing::fd_slope(
            [&](const Vec& th) { return log_likelihood(t, th, x, Vec(), false).value; }, theta, v);
        CHECK(std::fabs(fd - e.grad.dot(v)) <= 1e-5 * std::max(1.0, std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("copula marginals are uniform") {
  const Mat r{{1.0, 0.6}, {0.6, 1.0}};
  for (double u1 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    // Integrate c(u1, u2) du2 with u2 = Φ(z).
    const double g = sngd::testing::simpson(
        [&](double z) {
          const double u2 = 0.5 * std::erfc(-z / std::numbers::sqrt2);
          return std::exp(gaussian_copula_logpdf_grad(r, Vec{{u1, u2}}).value) *
                 std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
        },
        -8.0, 8.0, 2000);
    CHECK(std::fabs(g - 1.0) < 1e-2);
    const boost::math::students_t_distribution<double> t(6.0);
    const double tc = sngd::testing::simpson(
        [&](double z) {
          const double u2 = boost::math::cdf(t, z);
          return std::exp(t_copula_logpdf_grad({r, 6.0}, Vec{{u1, u2}}).value) * boost::math::pdf(t, z);
        },
        -60.0, 60.0, 4000);
    CHECK(std::fabs(tc - 1.0) < 1e-2);
  }
}

TEST_CASE("every target gradient matches central differences at seeded points") {
  std::mt19937_64 rng(18);
  for (const auto& t : all_targets()) {
    CAPTURE(t.name());
    for (int trial = 0; trial < 10; ++trial) {
      const Vec theta = random_params(t, rng);
      const Mat x = sample(t, theta, 8, rng);
      const auto e = log_likelihood(t, theta, x);
      const Vec v = random_direction(t, rng);
      const double fd = sngd::testing::fd_slope(
          [&](const Vec& th) { return log_likelihood(t, th, x, Vec(), false).value; }, theta, v, 1e-5);
      CHECK(std::fabs(fd - e.grad.dot(v)) <= 1e-4 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("weights act as repeated rows") {
  std::mt19937_64 rng(19);
  const auto t = TargetDescriptor::skew_normal(2);
  const Vec theta = random_params(t, rng);
  const Mat x = sample(t, theta, 3, rng);
  Mat dup(6, 2);
  dup << x, x;
  const auto a = log_likelihood(t, theta, x, Vec::Constant(3, 2.0));
  const auto b = log_likelihood(t, theta, dup);
  CHECK(std::fabs(a.value - b.value) < 1e-12);
  CHECK(rel_err(a.grad, b.grad) < 1e-12);
  const Vec rows = log_density_rows(t, theta, x);
  CHECK(std::fabs(rows.sum() - log_likelihood(t, theta, x, Vec(), false).value) < 1e-12);
}

TEST_CASE("logistic regression joint") {
  LogRegModel prior_only{Mat(0, 3), Vec(0), 2.5};
  const Vec w{{0.3, -1.0, 2.0}};
  CHECK((logreg_logjoint_grad(prior_only, w).grad + 2.5 * w).norm() < 1e-15);

  std::mt19937_64 rng(20);
  LogRegModel model{Mat(20, 3), Vec(20), 1.0};
  for (int i = 0; i < 20; ++i) {
    model.design.row(i) = sngd::testing::random_vec(3, rng).transpose();
    model.labels[i] = (i % 3 == 0) ? -1.0 : 1.0;
  }
  auto f = [&](const Vec& x) { return logreg_logjoint_grad(model, x).value; };
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = sngd::testing::random_vec(3, rng);
    const Vec fd = sngd::testing::fd_gradient(f, x, 1e-6);
    CHECK(rel_err(logreg_logjoint_grad(model, x).grad, fd) < 1e-7);
    const Vec v = sngd::testing::random_vec(3, rng);
    const double h = 1e-4;
    const double curvature = (f(x + h * v) - 2 * f(x) + f(x - h * v)) / (h * h);
    CHECK(curvature <= 0.0);
  }
  const Vec map = logreg_map_estimate(model);
  CHECK(logreg_logjoint_grad(model, map).grad.norm() < 1e-10);
  CHECK_THROWS_AS(logreg_logjoint_grad(LogRegModel{Mat(2, 3), Vec(1), 1.0}, w), ShapeError);
}

TEST_CASE("samplers") {
  const auto nb = TargetDescriptor::negbin();
  const Mat x = sample(nb, Vec{{2.0, 0.5}}, 100000, 42u);
  const double se = std::sqrt(2.0 * 0.5 / 0.25 / 100000.0);
  CHECK(std::fabs(x.mean() - 2.0) < 3 * se);
  CHECK((x - sample(nb, Vec{{2.0, 0.5}}, 100000, 42u)).norm() == 0.0);

  const auto sn = TargetDescriptor::skew_normal(2);
  Vec theta(8);
  theta << 1.0, -2.0, 2.0, 0.3, 0.3, 0.5, 0.0, 0.0;
  const Index n = 50000;
  const Mat y = sample(sn, theta, n, 43u);
  const Vec mean = y.colwise().mean();
  CHECK(std::fabs(mean[0] - 1.0) < 4 * std::sqrt(2.0 / n));
  CHECK(std::fabs(mean[1] + 2.0) < 4 * std::sqrt(0.5 / n));

  // With a slant, E[x] = ξ + √(2/π) δ.
  theta.tail(2) << 1.5, -0.5;
  const Mat ys = sample(sn, theta, n, 44u);
  const Mat omega{{2.0, 0.3}, {0.3, 0.5}};
  const Vec oe = omega * theta.tail(2);
  const Vec delta = oe / std::sqrt(1.0 + theta.tail(2).dot(oe));
  const Vec want = Vec{{1.0, -2.0}} + std::sqrt(2.0 / std::numbers::pi) * delta;
  const Vec got = ys.colwise().mean();
  CHECK(std::fabs(got[0] - want[0]) < 4 * std::sqrt(2.0 / n));
  CHECK(std::fabs(got[1] - want[1]) < 4 * std::sqrt(0.5 / n));

  const Mat u = sample(TargetDescriptor::t_copula(2), Vec{{1.0, 0.4, 0.4, 1.0, 5.0}}, 20000, 45u);
  CHECK((u.array() > 0.0).all());
  CHECK((u.array() < 1.0).all());
  CHECK(std::fabs(u.col(0).mean() - 0.5) < 4 * std::sqrt(1.0 / 12.0 / 20000));
  CHECK_THROWS_AS(sample(nb, Vec{{2.0, 1.5}}, 3, 1u), DomainError);
}

TEST_CASE("free coordinates round trip and pull back") {
  std::mt19937_64 rng(21);
  for (const auto& t : all_targets()) {
    CAPTURE(t.name());
    for (int trial = 0; trial < 5; ++trial) {
      const Vec theta = random_params(t, rng);
      const Vec f = free_from_flat(t, theta);
      CHECK(f.size() == free_size(t));
      CHECK(rel_err(flat_from_free(t, f), theta) < 1e-12);
      const Vec v = sngd::testing::random_vec(f.size(), rng);
      const Vec c = sngd::testing::random_vec(t.flat_size(), rng);
      const Vec jv = sngd::testing::fd_directional([&](const Vec& x) { return flat_from_free(t, x); }, f, v);
      CHECK(std::fabs(c.dot(jv) - flat_from_free_pullback(t, f, c).dot(v)) <= 1e-6 * std::max(1.0, std::fabs(c.dot(jv))));
    }
  }
}

TEST_CASE("validation") {
  CHECK(is_valid(TargetDescriptor::negbin(), Vec{{1.0, 0.5}}));
  CHECK_FALSE(is_valid(TargetDescriptor::negbin(), Vec{{1.0, 0.0}}));
  CHECK_FALSE(is_valid(TargetDescriptor::negbin_mixture(2), Vec{{0.5, 0.6, 1.0, 0.5, 1.0, 0.5}}));
  CHECK_FALSE(is_valid(TargetDescriptor::t_copula(1), Vec{{1.0, 1.5}}));
  CHECK_FALSE(is_valid(TargetDescriptor::gaussian_copula(2), Vec{{1.0, 0.2, 0.2, 1.1}}));
  CHECK_FALSE(is_valid(TargetDescriptor::skew_normal(1), Vec{{0.0, -1.0, 0.0}}));
  CHECK(TargetDescriptor::skew_normal_mixture(2, 3).flat_size() == 2 * (1 + 15));
}
