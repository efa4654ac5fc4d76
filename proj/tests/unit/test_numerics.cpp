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

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sngd/numerics.hpp"
#include "unit/test_support.hpp"

using namespace sngd;
using namespace sngd::numerics;
using sngd::testing::rel_err;

TEST_CASE("lgamma at the integers 1 and 2 is zero") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0));
  CHECK(log_gamma(2.0) == doctest::Approx(0.0));
}

TEST_CASE("digamma recurrence") {
  for (double x : {0.5, 1.0, 7.0}) {
    CHECK(std::fabs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-13);
  }
}

TEST_CASE("digamma and trigamma reference values at 1") {
  // -Euler-Mascheroni and pi^2/6.
  CHECK(rel_err(digamma(1.0), -0.57721566490153286061) < 1e-14);
  CHECK(rel_err(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0) < 1e-14);
}

TEST_CASE("gamma family matches boost on [1e-6, 1e6]") {
  for (double e = -6.0; e <= 6.0; e += 0.25) {
    const double x = std::pow(10.0, e) * 1.37;
    if (x > 1e6) continue;
    const auto g = log_gamma_family(x);
    const double want_di = boost::math::digamma(x);
    const double want_tri = boost::math::trigamma(x);
    // digamma has a root near 1.4616; compare absolutely there.
    CHECK(std::fabs(g.digamma - want_di) <= 1e-12 * std::max(1.0, std::fabs(want_di)));
    CHECK(std::fabs(g.trigamma - want_tri) <= 1e-12 * std::fabs(want_tri));
    // The reference subtracts two numbers of size |log x|, so it carries that much rounding.
    CHECK(std::fabs(log_minus_digamma(x) - (std::log(x) - want_di)) <=
          1e-12 * std::fabs(std::log(x) - want_di) + 4e-16 * std::max(1.0, std::fabs(std::log(x))));
  }
}

TEST_CASE("finite differences of lgamma and digamma") {
  for (double x : {1e-3, 0.02, 0.7, 3.3, 12.0, 150.0, 1e3}) {
    const double h = 1e-5 * x;
    const double d_lgamma = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h);
    const double d_digamma = (digamma(x + h) - digamma(x - h)) / (2 * h);
    CHECK(rel_err(d_lgamma, digamma(x)) < 1e-6 * std::max(1.0, 1.0 / std::fabs(digamma(x))));
    CHECK(std::fabs(d_digamma - trigamma(x)) / trigamma(x) < 1e-6);
  }
}

TEST_CASE("gamma functions reject non-positive and non-finite input") {
  CHECK_THROWS_AS(log_gamma_family(0.0), DomainError);
  CHECK_THROWS_AS(digamma(-1.0), DomainError);
  CHECK_THROWS_AS(trigamma(std::numeric_limits<double>::infinity()), DomainError);
  CHECK_THROWS_AS(digamma(std::nan("")), DomainError);
}

TEST_CASE("gaussian cdf symmetry and reference value") {
  CHECK(normal_cdf(0.0) == 0.5);
  for (double x : {0.3, 1.7, 4.0}) CHECK(std::fabs(normal_cdf(-x) + normal_cdf(x) - 1.0) < 1e-15);
  const boost::math::normal_distribution<double> ref;
  CHECK(std::fabs(normal_cdf(1.959963985) - 0.975) < 1e-9);
  CHECK(std::fabs(normal_cdf(1.959963985) - boost::math::cdf(ref, 1.959963985)) < 1e-15);
}

TEST_CASE("gaussian quantile inverts the cdf") {
  const boost::math::normal_distribution<double> ref;
  for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 1 - 1e-9}) {
    const double q = normal_quantile(p);
    CHECK(std::fabs(q - boost::math::quantile(ref, p)) <= 1e-12 * std::max(1.0, std::fabs(q)));
    CHECK(std::fabs(normal_cdf(q) - p) <= 1e-10 * std::max(p, 1e-300) + 1e-300);
  }
  for (double x = -5.99; x < 6.0; x += 0.137) {
    CHECK(std::fabs(normal_quantile(normal_cdf(x)) - x) < 1e-8);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("gaussian log cdf and mills ratio deep in the lower tail") {
  for (double x : {-50.0, -36.0, -30.0, -10.0, -1.0, 0.0, 2.0, 9.0}) {
    // d/dx log Φ(x) = φ(x)/Φ(x)
    const double h = 1e-6 * std::max(1.0, std::fabs(x));
    const double fd = (normal_log_cdf(x + h) - normal_log_cdf(x - h)) / (2 * h);
    CHECK(rel_err(normal_mills_ratio(x), fd) < 1e-6);
    CHECK(std::isfinite(normal_log_cdf(x)));
  }
  CHECK(std::fabs(normal_log_cdf(-10.0) - std::log(boost::math::cdf(boost::math::normal_distribution<double>(), -10.0))) < 1e-12);
}

TEST_CASE("student t log pdf and quantile") {
  CHECK(student_t_quantile(0.5, 7.0) == 0.0);
  CHECK(std::fabs(student_t_log_pdf(0.0, 1.0) - std::log(1.0 / std::numbers::pi)) < 1e-12);
  CHECK(std::fabs(student_t_log_pdf(0.0, 1.0) - (-1.1447299)) < 1e-7);
  for (double x : {0.0, 1.0, 2.0}) {
    CHECK(std::fabs(student_t_log_pdf(x, 1e6) - normal_log_pdf(x)) < 1e-4);
    CHECK(student_t_log_pdf(x, 3.5) == student_t_log_pdf(-x, 3.5));
  }
  CHECK_THROWS_AS(student_t_log_pdf(0.1, 0.0), DomainError);
  CHECK_THROWS_AS(student_t_quantile(0.1, -2.0), DomainError);
}

TEST_CASE("student t cdf and quantile agree with boost") {
  for (double nu : {0.7, 2.5, 7.0, 50.0, 1e4}) {
    const boost::math::students_t_distribution<double> ref(nu);
    for (double x : {-30.0, -3.0, -0.4, 0.0, 0.9, 5.0}) {
      CHECK(std::fabs(student_t_cdf(x, nu) - boost::math::cdf(ref, x)) <
            1e-12 * boost::math::cdf(ref, x) + 1e-14);
    }
    for (double p : {1e-7, 0.01, 0.3, 0.5, 0.8, 0.999}) {
      const double q = student_t_quantile(p, nu);
      CHECK(std::fabs(q - boost::math::quantile(ref, p)) < 1e-9 * std::max(1.0, std::fabs(q)));
    }
  }
}

TEST_CASE("spd kernels on diagonal and identity matrices") {
  const SpdMatrix id(Mat::Identity(3, 3));
  CHECK((id.cholesky().matrix() - Mat::Identity(3, 3)).norm() == 0.0);
  CHECK(id.log_det() == 0.0);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const SpdMatrix s(d);
  CHECK(s.cholesky().matrix()(0, 0) == doctest::Approx(2.0));
  CHECK(s.cholesky().matrix()(1, 1) == doctest::Approx(3.0));
  CHECK(s.log_det() == doctest::Approx(std::log(36.0)));
}

TEST_CASE("spd kernels reconstruct and solve seeded random matrices") {
  std::mt19937_64 rng(7);
  for (int d : {1, 3, 8, 20}) {
    const Mat m = sngd::testing::random_spd(d, rng, 0.0) * d + Mat::Identity(d, d);
    const SpdMatrix s(m);
    const Mat& l = s.cholesky().matrix();
    CHECK((l * l.transpose() - m).norm() / m.norm() < 1e-10);
    CHECK(std::fabs(s.log_det() - 2.0 * l.diagonal().array().log().sum()) < 1e-12);
    const Vec b = sngd::testing::random_vec(d, rng);
    const Vec x = s.solve(b);
    CHECK((m * x - b).norm() / b.norm() < 1e-9);
  }
}

TEST_CASE("spd kernels reject indefinite and asymmetric matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 5;
    Mat q = Mat(Eigen::HouseholderQR<Mat>(sngd::testing::random_symmetric(d, rng)).householderQ());
    Vec eig = sngd::testing::random_vec(d, rng).cwiseAbs().array() + 0.1;
    eig[trial % d] = -0.05 - 0.01 * trial;  // one negative eigenvalue
    const Mat m = q * eig.asDiagonal() * q.transpose();
    const Mat sym = 0.5 * (m + m.transpose());
    CHECK_THROWS_AS(SpdMatrix{sym}, NotPositiveDefinite);
    CHECK_FALSE(SpdMatrix::try_make(sym).has_value());
  }
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(SpdMatrix{asym}, DomainError);
  CHECK_THROWS_AS(LowerTriangular(Mat::Identity(2, 2) * -1.0), DomainError);
}

TEST_CASE("matrix-function pullbacks match finite differences") {
  std::mt19937_64 rng(19);
  for (int d : {1, 2, 4}) {
    CAPTURE(d);
    const Mat sigma = sngd::testing::random_spd(d, rng, 0.5);
    const Mat w = sngd::testing::random_symmetric(d, rng);
    auto inner = [&](const Mat& m) { return (w.array() * m.array()).sum(); };

    // corr(Σ)
    const Mat cot_cov = correlation_pullback(sigma, w);
    const Mat fd_cov = sngd::testing::fd_symmetric_gradient(
        [&](const Mat& s) { return inner(correlation_from_covariance(s)); }, sigma);
    CHECK((cot_cov - fd_cov).norm() <= 1e-6 * std::max(1.0, fd_cov.norm()));

    // L Lᵀ from packed factors
    const Vec packed = packed_from_lower(Mat(SpdMatrix(sigma).cholesky().matrix()));
    CHECK((lower_from_packed(packed, d) * lower_from_packed(packed, d).transpose() - sigma).norm() <= 1e-12);
    auto outer = [&](const Vec& p) {
      const Mat l = lower_from_packed(p, d);
      return inner(l * l.transpose());
    };
    const Vec g_packed = packed_outer_pullback(packed, d, w);
    CHECK(rel_err(g_packed, sngd::testing::fd_gradient(outer, packed, 1e-6)) <= 1e-6);

    // Σ ↦ chol(Σ), composed with a linear functional of the factor.
    const Mat wl = sngd::testing::random_symmetric(d, rng);
    auto of_chol = [&](const Mat& s) {
      const Mat l = SpdMatrix(symmetrize(s)).cholesky().matrix();
      return (wl.array() * l.array()).sum();
    };
    const Mat l = SpdMatrix(sigma).cholesky().matrix();
    const Mat g_sigma = cholesky_pullback(l, wl);
    const Mat fd_sigma = sngd::testing::fd_symmetric_gradient(of_chol, sigma);
    CHECK(asymmetry(g_sigma) <= 1e-14);
    CHECK((g_sigma - fd_sigma).norm() <= 1e-6 * std::max(1.0, fd_sigma.norm()));
  }
}
