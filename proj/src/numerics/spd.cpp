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

#include <algorithm>
#include <cmath>

#include "sngd/numerics.hpp"

namespace sngd::numerics {
namespace {

constexpr double kSymmetryTol = 1e-12;

}  // namespace

LowerTriangular::LowerTriangular(Mat entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw ShapeError("LowerTriangular: matrix must be square");
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    if (!(entries_(j, j) > 0.0)) {
      throw DomainError("LowerTriangular: diagonal entries must be strictly positive");
    }
    for (Eigen::Index i = 0; i < j; ++i) {
      if (entries_(i, j) != 0.0) throw DomainError("LowerTriangular: nonzero above diagonal");
    }
  }
}

double asymmetry(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

SpdMatrix::SpdMatrix(Mat entries, LowerTriangular chol)
    : entries_(std::move(entries)), chol_(std::move(chol)) {}

std::optional<SpdMatrix> SpdMatrix::try_make(const Mat& entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) return std::nullopt;
  if (!entries.allFinite() || asymmetry(entries) > kSymmetryTol) return std::nullopt;
  Mat sym = symmetrize(entries);
  Eigen::LLT<Mat> llt(sym);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Mat l = llt.matrixL();
  if (!(l.diagonal().array() > 0.0).all() || !l.allFinite()) return std::nullopt;
  return SpdMatrix(std::move(sym), LowerTriangular(std::move(l)));
}

SpdMatrix::SpdMatrix(const Mat& entries) : chol_(Mat::Identity(1, 1)) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw ShapeError("SpdMatrix: matrix must be square and nonempty");
  }
  if (!entries.allFinite()) throw DomainError("SpdMatrix: non-finite entries");
  if (asymmetry(entries) > kSymmetryTol) throw DomainError("SpdMatrix: matrix is not symmetric");
  auto made = try_make(entries);
  if (!made) throw NotPositiveDefinite("SpdMatrix: Cholesky factorisation hit a non-positive pivot");
  *this = std::move(*made);
}

double SpdMatrix::log_det() const {
  return 2.0 * chol_.matrix().diagonal().array().log().sum();
}

Vec SpdMatrix::solve(const Vec& rhs) const {
  if (rhs.size() != dim()) throw ShapeError("SpdMatrix::solve: size mismatch");
  const auto l = chol_.matrix().triangularView<Eigen::Lower>();
  Vec y = l.solve(rhs);
  return l.transpose().solve(y);
}

Mat SpdMatrix::solve(const Mat& rhs) const {
  if (rhs.rows() != dim()) throw ShapeError("SpdMatrix::solve: size mismatch");
  const auto l = chol_.matrix().triangularView<Eigen::Lower>();
  Mat y = l.solve(rhs);
  return l.transpose().solve(y);
}

Mat SpdMatrix::inverse() const {
  return symmetrize(solve(Mat(Mat::Identity(dim(), dim()))));
}

Mat correlation_from_covariance(const Mat& cov) {
  if (cov.rows() != cov.cols()) throw ShapeError("corr: matrix is not square");
  if ((cov.diagonal().array() <= 0.0).any()) throw DomainError("corr: non-positive diagonal");
  const Vec s = cov.diagonal().array().rsqrt();
  Mat r = s.asDiagonal() * cov * s.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

// With S = D^(-1/2) and R = SΣS, a symmetric cotangent G on R pulls back to
// SGS - diag((RG)_ii / Σ_ii).
Mat correlation_pullback(const Mat& cov, const Mat& cot_corr) {
  const Vec s = cov.diagonal().array().rsqrt();
  const Mat r = correlation_from_covariance(cov);
  const Mat g = symmetrize(cot_corr);
  Mat out = s.asDiagonal() * g * s.asDiagonal();
  const Vec rg_diag = (r * g).diagonal();
  out.diagonal() -= rg_diag.cwiseQuotient(cov.diagonal());
  return out;
}

Eigen::Index packed_lower_size(Eigen::Index dim) { return dim * (dim + 1) / 2; }

Mat lower_from_packed(const Vec& packed, Eigen::Index dim) {
  if (packed.size() != packed_lower_size(dim)) throw ShapeError("packed factor: wrong length");
  Mat l = Mat::Zero(dim, dim);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = j; i < dim; ++i) l(i, j) = i == j ? std::exp(packed[k++]) : packed[k++];
  }
  return l;
}

Vec packed_from_lower(const Mat& lower) {
  const Eigen::Index dim = lower.rows();
  Vec packed(packed_lower_size(dim));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (lower(j, j) <= 0.0) throw DomainError("packed factor: non-positive diagonal");
    for (Eigen::Index i = j; i < dim; ++i) packed[k++] = i == j ? std::log(lower(i, j)) : lower(i, j);
  }
  return packed;
}

Vec packed_outer_pullback(const Vec& packed, Eigen::Index dim, const Mat& cot_outer) {
  const Mat l = lower_from_packed(packed, dim);
  const Mat cot_l = 2.0 * symmetrize(cot_outer) * l;
  Vec out(packed.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = j; i < dim; ++i) out[k++] = i == j ? cot_l(i, j) * l(i, j) : cot_l(i, j);
  }
  return out;
}

// With Σ = L Lᵀ, the symmetric S solving tril(2 S L) = L̄ satisfies
// 2 Lᵀ S L = Φ(Lᵀ L̄), where Φ symmetrises from the lower triangle.
Mat cholesky_pullback(const Mat& lower, const Mat& cot_lower) {
  if (lower.rows() != lower.cols() || cot_lower.rows() != lower.rows() || cot_lower.cols() != lower.cols()) {
    throw ShapeError("cholesky_pullback: shape mismatch");
  }
  const Mat l = lower.triangularView<Eigen::Lower>();
  const Mat p = l.transpose() * Mat(cot_lower.triangularView<Eigen::Lower>());
  Mat phi = p.triangularView<Eigen::Lower>();
  phi += Mat(p.triangularView<Eigen::StrictlyLower>()).transpose();
  // S = ½ L⁻ᵀ Φ L⁻¹
  const auto tri = l.triangularView<Eigen::Lower>();
  Mat right = tri.transpose().solve(phi);
  Mat s = tri.transpose().solve(Mat(right.transpose())).transpose();
  return symmetrize(0.5 * s);
}

}  // namespace sngd::numerics
