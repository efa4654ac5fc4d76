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

#ifndef SNGD_NUMERICS_HPP
#define SNGD_NUMERICS_HPP

#include <optional>

#include <Eigen/Dense>

#include "sngd/error.hpp"

namespace sngd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace numerics {

// ---------------------------------------------------------------------------
// Gamma-function family
// ---------------------------------------------------------------------------

struct GammaFunctions {
  double lgamma;
  double digamma;
  double trigamma;
};

/// log Γ(x), ψ(x) and ψ'(x) for x > 0. Throws DomainError otherwise.
GammaFunctions log_gamma_family(double x);

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

/// log x - ψ(x), computed without the cancellation of the naive difference.
double log_minus_digamma(double x);

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

struct GaussianFunctions {
  double log_pdf;
  double cdf;
};

GaussianFunctions gaussian_functions(double x);

double normal_log_pdf(double x);
double normal_cdf(double x);
/// log Φ(x), accurate far into the lower tail.
double normal_log_cdf(double x);
/// φ(x)/Φ(x), the derivative of log Φ.
double normal_mills_ratio(double x);
/// Φ⁻¹(p) for p in (0, 1).
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// Student t
// ---------------------------------------------------------------------------

double student_t_log_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
/// Inverse CDF by safeguarded Newton on a bracket, 1e-12 interval tolerance.
double student_t_quantile(double p, double nu);

/// Regularised incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);

// ---------------------------------------------------------------------------
// SPD kernels
// ---------------------------------------------------------------------------

/// Lower-triangular matrix with strictly positive diagonal.
class LowerTriangular {
 public:
  explicit LowerTriangular(Mat entries);

  const Mat& matrix() const noexcept { return entries_; }
  Eigen::Index dim() const noexcept { return entries_.rows(); }

 private:
  Mat entries_;
};

/// Symmetric positive-definite matrix together with its Cholesky factor.
class SpdMatrix {
 public:
  /// Throws NotPositiveDefinite (or ShapeError/DomainError for a non-square
  /// or asymmetric input).
  explicit SpdMatrix(const Mat& entries);

  /// Returns nullopt instead of throwing when `entries` is not SPD.
  static std::optional<SpdMatrix> try_make(const Mat& entries);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Mat& matrix() const noexcept { return entries_; }
  const LowerTriangular& cholesky() const noexcept { return chol_; }

  double log_det() const;
  Vec solve(const Vec& rhs) const;
  Mat solve(const Mat& rhs) const;
  Mat inverse() const;

 private:
  SpdMatrix(Mat entries, LowerTriangular chol);

  Mat entries_;
  LowerTriangular chol_;
};

/// Relative asymmetry max|S - Sᵀ| / max(1, max|S|).
double asymmetry(const Mat& m);

/// Symmetric part (S + Sᵀ)/2.
inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// corr(Σ) = D^(-1/2) Σ D^(-1/2) with D the diagonal of Σ.
Mat correlation_from_covariance(const Mat& cov);

/// Pulls a symmetric cotangent on corr(Σ) back to a symmetric cotangent on Σ.
Mat correlation_pullback(const Mat& cov, const Mat& cot_corr);

/// Lower-triangular factor packing used for unconstrained covariance
/// parameters: the lower triangle column by column, with the diagonal
/// stored as logarithms.
Eigen::Index packed_lower_size(Eigen::Index dim);
Mat lower_from_packed(const Vec& packed, Eigen::Index dim);
Vec packed_from_lower(const Mat& lower);
/// Pulls a symmetric cotangent on L Lᵀ back to the packed factor.
Vec packed_outer_pullback(const Vec& packed, Eigen::Index dim, const Mat& cot_outer);

/// Given the Cholesky factor L of Σ and a cotangent on the lower triangle of
/// L (the upper triangle is ignored), returns the symmetric cotangent on Σ.
Mat cholesky_pullback(const Mat& lower, const Mat& cot_lower);

}  // namespace numerics
}  // namespace sngd

#endif  // SNGD_NUMERICS_HPP
