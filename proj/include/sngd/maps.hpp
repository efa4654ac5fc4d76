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

#ifndef SNGD_MAPS_HPP
#define SNGD_MAPS_HPP

#include <optional>
#include <string>
#include <vector>

#include "sngd/expfam.hpp"
#include "sngd/targets.hpp"

/// Surrogate-to-target parameter maps θ = g(θ̃, λ).
///
///   negbin                 Gamma(α, β)          (r, s) = (α/(1 - β), β), β < 1
///   negbin-mixture         Mixture(k, Gamma)    componentwise, π passed through
///   skew-normal            Normal(d)            (ξ, Ω, slant) = (m, Σ, λ)
///   skew-normal-mixture    Mixture(k, Normal)   componentwise, λ = (slant₁..slantₖ)
///   gaussian-copula        ZeroMeanNormal(d)    R = corr(Σ)
///   t-copula               ZeroMeanNormal(d)    R = corr(Σ), ν = 2 + exp(λ)
///   identity               any family           θ = standard parameters
///
/// The surrogate side is always given in standard coordinates. Auxiliary
/// parameters λ are unconstrained.
namespace sngd::maps {

using expfam::Coordinates;
using expfam::FamilyDescriptor;
using expfam::MeanParams;
using expfam::NaturalParams;
using expfam::StandardParams;
using targets::TargetDescriptor;

enum class MapKind {
  kNegBin,
  kNegBinMixture,
  kSkewNormal,
  kSkewNormalMixture,
  kGaussianCopula,
  kTCopula,
  kIdentity,
};

class MapDescriptor {
 public:
  static MapDescriptor negbin();
  static MapDescriptor negbin_mixture(int components);
  static MapDescriptor skew_normal(int dim);
  static MapDescriptor skew_normal_mixture(int components, int dim);
  static MapDescriptor gaussian_copula(int dim);
  static MapDescriptor t_copula(int dim);
  static MapDescriptor identity(const FamilyDescriptor& family);

  /// Builds a map from its stable identifier. Throws ConfigError naming the
  /// identifier when it is unknown.
  static MapDescriptor from_id(const std::string& id, int dim = 1, int components = 1);
  static const std::vector<std::string>& identifiers();

  MapKind kind() const noexcept { return kind_; }
  const std::string& id() const noexcept { return id_; }
  const FamilyDescriptor& surrogate() const noexcept { return surrogate_; }
  /// The target distribution, when the map's image is one of the modelled
  /// targets (identity maps onto a normal give normal(d); other identity
  /// maps have none).
  const std::optional<TargetDescriptor>& target() const noexcept { return target_; }
  Eigen::Index target_size() const;
  Eigen::Index aux_size() const;

 private:
  MapDescriptor(MapKind kind, std::string id, FamilyDescriptor surrogate,
                std::optional<TargetDescriptor> target);

  MapKind kind_;
  std::string id_;
  FamilyDescriptor surrogate_;
  std::optional<TargetDescriptor> target_;
};

/// θ = g(s, λ). Throws DomainError when a map predicate fails.
Vec map_forward(const MapDescriptor& map, const StandardParams& surrogate, const Vec& aux);

struct MapCotangent {
  Vec surrogate;  // standard coordinates
  Vec aux;
};

/// Jᵀc of map_forward at (surrogate, aux).
MapCotangent map_pullback(const MapDescriptor& map, const StandardParams& surrogate, const Vec& aux,
                          const Vec& cot_target);

struct MapPreimage {
  StandardParams surrogate;
  Vec aux;
};

/// A point (s, λ) with g(s, λ) = θ. Copula maps return Σ = R.
MapPreimage map_inverse(const MapDescriptor& map, const Vec& target);

/// True iff the standard parameters satisfy the map predicates (β < 1 for
/// every negbin component).
bool standard_predicate(const MapDescriptor& map, const StandardParams& surrogate);

/// True iff the conversion to standard parameters succeeds and the map
/// predicates hold. Never throws.
bool domain_check(const MapDescriptor& map, const MeanParams& mu);
bool domain_check(const MapDescriptor& map, const NaturalParams& eta);

// ---------------------------------------------------------------------------
// The dual-parameter chain f(g(dualparams(θ̃), λ))
// ---------------------------------------------------------------------------

/// Every representation of the surrogate at θ̃.
struct ChainPoint {
  Coordinates coords;  // kMean or kNatural
  NaturalParams eta;
  MeanParams mu;
  StandardParams standard;
  Vec aux;
  Vec target;
};

/// Evaluates all representations at θ̃ given in `coords`. Throws DomainError
/// when θ̃ fails domain_check.
ChainPoint chain_forward(const MapDescriptor& map, Coordinates coords, const Vec& theta_tilde,
                         const Vec& aux);

struct ChainGradient {
  /// Gradient of f(g(·)) with respect to the dual of θ̃. This is the natural
  /// gradient in θ̃ coordinates and the SNGD step direction.
  Vec direction;
  /// Ordinary gradient with respect to θ̃.
  Vec plain;
  Vec aux;
  /// Cotangent on the surrogate's standard parameters.
  Vec standard;
};

enum class ChainPath { kFused, kUnfused };

/// Pulls a target-space gradient back through the chain. The fused path
/// differentiates the standard form as a function of the dual parameters
/// directly; the unfused path goes through θ̃ and a dual pullback.
ChainGradient chain_pullback(const MapDescriptor& map, const ChainPoint& point, const Vec& cot_target,
                             ChainPath path = ChainPath::kFused);

}  // namespace sngd::maps

#endif  // SNGD_MAPS_HPP
