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

#ifndef SNGD_EXPFAM_HPP
#define SNGD_EXPFAM_HPP

#include <memory>
#include <string>
#include <vector>

#include "sngd/numerics.hpp"
#include "sngd/random.hpp"

/// Exponential families used as surrogates.
///
/// Every family has three flat coordinate systems sharing one descriptor:
///
///   natural   η   the density is exp(t(x)·η - A(η)) with base measure 1
///   mean      μ   μ = E[t(x)] = ∇A(η)
///   standard      the textbook parameters (shape/rate, mean/covariance, ...)
///
/// Layouts (matrices are stored full and column-major; all cotangents on a
/// matrix block use the symmetric convention, i.e. the unique symmetric G
/// with df = Σ_ij G_ij dX_ij for symmetric dX):
///
///   Gamma            t(x) = (x, log x)    η = (-β, α - 1)      μ = (α/β, ψ(α) - log β)
///                                          standard = (α, β)
///   Normal(d)        t(x) = (x, xxᵀ)      η = (Σ⁻¹m, -½Σ⁻¹)    μ = (m, Σ + mmᵀ)
///                                          standard = (m, Σ)
///   ZeroMeanNormal   t(x) = xxᵀ           η = -½Σ⁻¹            μ = Σ,  standard = Σ
///   Mixture(k, c)    t(z,x) = (𝕀₁..𝕀ₖ₋₁, 𝕀₁t(x), .., 𝕀ₖt(x))
///                    η = (ν₁..νₖ₋₁, η₁..ηₖ) with νᵢ = log(πᵢ/πₖ) - A(ηᵢ) + A(ηₖ)
///                    μ = (π₁..πₖ₋₁, π₁μ₁, .., πₖμₖ)
///                    standard = (π₁..πₖ, standard₁, .., standardₖ)
///
/// The normal log-partition includes the (d/2) log 2π constant.
namespace sngd::expfam {

enum class FamilyKind { kGamma, kNormal, kZeroMeanNormal, kMixture };

class FamilyDescriptor {
 public:
  static FamilyDescriptor gamma();
  static FamilyDescriptor normal(int dim);
  static FamilyDescriptor zero_mean_normal(int dim);
  /// Components may not themselves be mixtures.
  static FamilyDescriptor mixture(int components, const FamilyDescriptor& component);

  FamilyKind kind() const noexcept { return kind_; }
  /// Dimension of x (1 for the gamma).
  int dim() const noexcept { return dim_; }
  /// Number of mixture components; 1 for non-mixtures.
  int components() const noexcept { return components_; }
  const FamilyDescriptor& component() const;

  /// Length of natural and mean parameter vectors.
  Eigen::Index param_size() const;
  Eigen::Index standard_size() const;

  std::string name() const;

  bool operator==(const FamilyDescriptor& other) const;
  bool operator!=(const FamilyDescriptor& other) const { return !(*this == other); }

 private:
  FamilyDescriptor(FamilyKind kind, int dim, int components,
                   std::shared_ptr<const FamilyDescriptor> component);

  FamilyKind kind_;
  int dim_;
  int components_;
  std::shared_ptr<const FamilyDescriptor> component_;
};

enum class Coordinates { kNatural, kMean, kStandard };

/// A flat parameter vector tagged with its family and coordinate system.
/// Construction only checks the length; use in_domain() for validity.
template <Coordinates C>
class Params {
 public:
  Params(FamilyDescriptor family, Vec values) : family_(std::move(family)), values_(std::move(values)) {
    const auto expected =
        C == Coordinates::kStandard ? family_.standard_size() : family_.param_size();
    if (values_.size() != expected) {
      throw ShapeError(family_.name() + ": expected " + std::to_string(expected) +
                       " parameters, got " + std::to_string(values_.size()));
    }
  }

  const FamilyDescriptor& family() const noexcept { return family_; }
  const Vec& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }

 private:
  FamilyDescriptor family_;
  Vec values_;
};

using NaturalParams = Params<Coordinates::kNatural>;
using MeanParams = Params<Coordinates::kMean>;
using StandardParams = Params<Coordinates::kStandard>;

// ---------------------------------------------------------------------------
// Standard-form views
// ---------------------------------------------------------------------------

struct GammaStandard {
  double shape;
  double rate;
};

struct NormalStandard {
  Vec mean;  // all zeros for ZeroMeanNormal
  Mat cov;
};

struct MixtureStandard {
  Vec weights;
  std::vector<StandardParams> components;
};

StandardParams make_gamma(double shape, double rate);
StandardParams make_normal(const Vec& mean, const Mat& cov);
StandardParams make_zero_mean_normal(const Mat& cov);
StandardParams make_mixture(const FamilyDescriptor& component, const Vec& weights,
                            const std::vector<StandardParams>& components);

GammaStandard as_gamma(const StandardParams& p);
NormalStandard as_normal(const StandardParams& p);
MixtureStandard as_mixture(const StandardParams& p);

/// Offset of component i's block within a mixture vector in the given
/// coordinates.
Eigen::Index mixture_block_offset(const FamilyDescriptor& mixture, Coordinates coords, int i);

// ---------------------------------------------------------------------------
// Domains and conversions
// ---------------------------------------------------------------------------

bool in_domain(const NaturalParams& eta);
bool in_domain(const MeanParams& mu);
bool in_domain(const StandardParams& std_params);

/// μ = ∇A(η). Throws DomainError when η is outside the natural domain.
MeanParams to_mean(const NaturalParams& eta);

/// Inverse of to_mean. The gamma block is solved by Newton iteration
/// (≤ 50 iterations, tolerance 1e-12); throws ConvergenceError otherwise.
NaturalParams to_natural(const MeanParams& mu);

double log_partition(const NaturalParams& eta);

StandardParams to_standard(const NaturalParams& eta);
StandardParams to_standard(const MeanParams& mu);
NaturalParams natural_from_standard(const StandardParams& s);
MeanParams mean_from_standard(const StandardParams& s);

// Cotangent pullbacks (Jacobian-transpose products) of the conversions
// above, evaluated at the given point.

/// Pulls a standard-coordinate cotangent back to natural coordinates.
Vec to_standard_pullback(const NaturalParams& at, const Vec& cot_standard);
/// Pulls a standard-coordinate cotangent back to mean coordinates.
Vec to_standard_pullback(const MeanParams& at, const Vec& cot_standard);
Vec natural_from_standard_pullback(const StandardParams& at, const Vec& cot_natural);
Vec mean_from_standard_pullback(const StandardParams& at, const Vec& cot_mean);

enum class PullbackDirection { kThroughToMean, kThroughToNatural };

/// Jᵀc for the map μ(·) at η (equal to ∇²A(η)·c).
Vec pullback_to_mean(const NaturalParams& at, const Vec& cot_mean);
/// Jᵀc for the map η(·) at μ (equal to ∇²A(η(μ))⁻¹·c).
Vec pullback_to_natural(const MeanParams& at, const Vec& cot_natural);

/// Dispatching form: `point` is natural for kThroughToMean and mean for
/// kThroughToNatural.
Vec dual_pullback(const FamilyDescriptor& family, const Vec& point, const Vec& cotangent,
                  PullbackDirection direction);

/// KL(q_η1 ‖ q_η2) = A(η2) - A(η1) - (η2 - η1)·μ(η1).
double ef_kl(const NaturalParams& eta1, const NaturalParams& eta2);

// ---------------------------------------------------------------------------
// Densities and sampling (non-mixture families; mixtures use the joint)
// ---------------------------------------------------------------------------

/// t(x). For the gamma x has one entry.
Vec sufficient_statistics(const FamilyDescriptor& family, const Vec& x);

/// log q_η(x) for a non-mixture family.
double log_density(const NaturalParams& eta, const Vec& x);

/// log q(z, x) of a mixture model, with z in [0, k).
double log_joint_density(const NaturalParams& eta, int z, const Vec& x);

/// log q(x) = log Σ_z q(z, x) of a mixture model.
double log_marginal_density(const NaturalParams& eta, const Vec& x);

/// Draws `count` samples (rows). Non-mixture families only.
Mat sample(const StandardParams& s, Eigen::Index count, Rng& rng);

}  // namespace sngd::expfam

#endif  // SNGD_EXPFAM_HPP
