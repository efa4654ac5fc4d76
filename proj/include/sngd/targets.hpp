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

#ifndef SNGD_TARGETS_HPP
#define SNGD_TARGETS_HPP

#include <optional>
#include <string>
#include <vector>

#include "sngd/numerics.hpp"
#include "sngd/random.hpp"

/// Target distributions optimised through a surrogate.
///
/// Each target has a flat parameter layout (matrices full, column-major,
/// symmetric cotangent convention as in expfam):
///
///   negbin                  (r, s)
///   negbin-mixture(k)       (π₁..πₖ, r₁, s₁, .., rₖ, sₖ)
///   skew-normal(d)          (ξ, Ω, slant)                   d + d² + d
///   skew-normal-mixture     (π₁..πₖ, block₁, .., blockₖ)
///   gaussian-copula(d)      R                                d²
///   t-copula(d)             (R, ν)                           d² + 1
///   normal(d)               (m, Σ)                           d + d²
///
/// Observations are matrix rows. Copula observations live in (0, 1)^d.
namespace sngd::targets {

enum class TargetKind {
  kNegBin,
  kNegBinMixture,
  kSkewNormal,
  kSkewNormalMixture,
  kGaussianCopula,
  kTCopula,
  kNormal,
};

class TargetDescriptor {
 public:
  static TargetDescriptor negbin();
  static TargetDescriptor negbin_mixture(int components);
  static TargetDescriptor skew_normal(int dim);
  static TargetDescriptor skew_normal_mixture(int components, int dim);
  static TargetDescriptor gaussian_copula(int dim);
  static TargetDescriptor t_copula(int dim);
  static TargetDescriptor normal(int dim);

  TargetKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  int components() const noexcept { return components_; }
  bool is_mixture() const noexcept;
  /// True for count-valued targets.
  bool discrete() const noexcept;
  Eigen::Index flat_size() const;
  /// Length of one component block of a mixture (or the whole vector).
  Eigen::Index block_size() const;
  std::string name() const;
  bool operator==(const TargetDescriptor& other) const = default;

 private:
  TargetDescriptor(TargetKind kind, int dim, int components);

  TargetKind kind_;
  int dim_;
  int components_;
};

// ---------------------------------------------------------------------------
// Typed parameters
// ---------------------------------------------------------------------------

struct NegBinParams {
  double r;
  double s;
};

struct SkewNormalParams {
  Vec xi;
  Mat omega;
  Vec slant;
};

struct CopulaParams {
  Mat corr;
  std::optional<double> nu;
};

template <class Component>
struct MixtureTargetParams {
  Vec weights;
  std::vector<Component> components;
};

void validate(const NegBinParams& p);
void validate(const SkewNormalParams& p);
void validate(const CopulaParams& p);

Vec flatten(const NegBinParams& p);
Vec flatten(const SkewNormalParams& p);
Vec flatten(const CopulaParams& p);
Vec flatten(const MixtureTargetParams<NegBinParams>& p);
Vec flatten(const MixtureTargetParams<SkewNormalParams>& p);

NegBinParams as_negbin(const Vec& flat);
SkewNormalParams as_skew_normal(const Vec& flat, int dim);
CopulaParams as_copula(const Vec& flat, int dim, bool with_nu);

/// Throws DomainError (or a subclass) when `theta` violates the target's
/// invariants.
void validate(const TargetDescriptor& target, const Vec& theta);
bool is_valid(const TargetDescriptor& target, const Vec& theta);

// ---------------------------------------------------------------------------
// Log densities
// ---------------------------------------------------------------------------

/// A log density (or a weighted sum of them) with its flat gradient.
struct Evaluation {
  double value = 0.0;
  Vec grad;
};

/// Σᵢ wᵢ log q_θ(xᵢ) over the rows of `x`, and its gradient in the flat
/// layout when `with_grad` is set. Empty `weights` means all ones.
Evaluation log_likelihood(const TargetDescriptor& target, const Vec& theta, const Mat& x,
                          const Vec& weights = Vec(), bool with_grad = true);

/// log q_θ(xᵢ) for every row.
Vec log_density_rows(const TargetDescriptor& target, const Vec& theta, const Mat& x);

Evaluation negbin_logpmf_grad(const NegBinParams& p, double x);
Evaluation skewnormal_logpdf_grad(const SkewNormalParams& p, const Vec& x);
Evaluation negbin_mixture_logpmf_grad(const MixtureTargetParams<NegBinParams>& p, double x);
Evaluation skewnormal_mixture_logpdf_grad(const MixtureTargetParams<SkewNormalParams>& p,
                                          const Vec& x);
Evaluation gaussian_copula_logpdf_grad(const Mat& corr, const Vec& u);
/// The ν entry of the gradient is a central difference through the whole
/// composition, since the quantiles depend on ν.
Evaluation t_copula_logpdf_grad(const CopulaParams& p, const Vec& u);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws `count` observations (rows).
Mat sample(const TargetDescriptor& target, const Vec& theta, Eigen::Index count, Rng& rng);
Mat sample(const TargetDescriptor& target, const Vec& theta, Eigen::Index count,
           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Unconstrained coordinates for first-order baselines
// ---------------------------------------------------------------------------
//
//   r, s           log r, logit s
//   π              softmax logits (k entries)
//   Ω, Σ           packed Cholesky factor with log diagonal
//   R              corr(L Lᵀ) with L a packed Cholesky factor
//   ν              log(ν - 2)

Eigen::Index free_size(const TargetDescriptor& target);
Vec flat_from_free(const TargetDescriptor& target, const Vec& free);
Vec free_from_flat(const TargetDescriptor& target, const Vec& theta);
/// Jᵀc for flat_from_free at `free`.
Vec flat_from_free_pullback(const TargetDescriptor& target, const Vec& free, const Vec& cot_flat);

// ---------------------------------------------------------------------------
// Bayesian logistic regression
// ---------------------------------------------------------------------------

/// Labels in {-1, +1}; prior N(0, I/regularization).
struct LogRegModel {
  Mat design;
  Vec labels;
  double regularization = 1.0;

  Eigen::Index dim() const noexcept { return design.cols(); }
  void validate() const;
};

/// log p(D, w) including the normalised Gaussian prior, with its gradient.
Evaluation logreg_logjoint_grad(const LogRegModel& model, const Vec& w);

/// Deterministic maximum a posteriori estimate by Newton's method.
Vec logreg_map_estimate(const LogRegModel& model);

}  // namespace sngd::targets

#endif  // SNGD_TARGETS_HPP
