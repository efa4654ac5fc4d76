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

#include "sngd/maps.hpp"

#include <cmath>

#include "sngd/error.hpp"

namespace sngd::maps {

using Index = Eigen::Index;

namespace {

Mat block_matrix(const Vec& flat, Index offset, Index dim) {
  return Eigen::Map<const Mat>(flat.data() + offset, dim, dim);
}

Vec flat(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

void check_aux(const MapDescriptor& map, const Vec& aux) {
  if (aux.size() != map.aux_size()) {
    throw ShapeError(map.id() + ": expected " + std::to_string(map.aux_size()) + " auxiliary parameters");
  }
  if (!aux.allFinite()) throw DomainError(map.id() + ": non-finite auxiliary parameters");
}

void check_surrogate(const MapDescriptor& map, const StandardParams& s) {
  if (s.family() != map.surrogate()) {
    throw ShapeError(map.id() + ": surrogate family " + s.family().name() + " does not match " +
                     map.surrogate().name());
  }
}

Vec negbin_forward(const Vec& gamma) {
  const double alpha = gamma[0], beta = gamma[1];
  if (!(beta < 1.0)) throw DomainError("negbin map: the gamma rate must be below 1");
  return Vec{{alpha / (1.0 - beta), beta}};
}

Vec negbin_pullback(const Vec& gamma, const Vec& c) {
  const double alpha = gamma[0], beta = gamma[1];
  const double inv = 1.0 / (1.0 - beta);
  return Vec{{c[0] * inv, c[0] * alpha * inv * inv + c[1]}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Descriptor
// ---------------------------------------------------------------------------

MapDescriptor::MapDescriptor(MapKind kind, std::string id, FamilyDescriptor surrogate,
                             std::optional<TargetDescriptor> target)
    : kind_(kind), id_(std::move(id)), surrogate_(std::move(surrogate)), target_(std::move(target)) {}

MapDescriptor MapDescriptor::negbin() {
  return {MapKind::kNegBin, "negbin", FamilyDescriptor::gamma(), TargetDescriptor::negbin()};
}

MapDescriptor MapDescriptor::negbin_mixture(int k) {
  return {MapKind::kNegBinMixture, "negbin-mixture", FamilyDescriptor::mixture(k, FamilyDescriptor::gamma()),
          TargetDescriptor::negbin_mixture(k)};
}

MapDescriptor MapDescriptor::skew_normal(int d) {
  return {MapKind::kSkewNormal, "skew-normal", FamilyDescriptor::normal(d), TargetDescriptor::skew_normal(d)};
}

MapDescriptor MapDescriptor::skew_normal_mixture(int k, int d) {
  return {MapKind::kSkewNormalMixture, "skew-normal-mixture",
          FamilyDescriptor::mixture(k, FamilyDescriptor::normal(d)), TargetDescriptor::skew_normal_mixture(k, d)};
}

MapDescriptor MapDescriptor::gaussian_copula(int d) {
  return {MapKind::kGaussianCopula, "gaussian-copula", FamilyDescriptor::zero_mean_normal(d),
          TargetDescriptor::gaussian_copula(d)};
}

MapDescriptor MapDescriptor::t_copula(int d) {
  return {MapKind::kTCopula, "t-copula", FamilyDescriptor::zero_mean_normal(d), TargetDescriptor::t_copula(d)};
}

MapDescriptor MapDescriptor::identity(const FamilyDescriptor& family) {
  std::optional<TargetDescriptor> target;
  std::string id = "identity";
  if (family.kind() == expfam::FamilyKind::kNormal) {
    target = TargetDescriptor::normal(family.dim());
    id = "vi-normal-identity";
  }
  return {MapKind::kIdentity, id, family, target};
}

const std::vector<std::string>& MapDescriptor::identifiers() {
  static const std::vector<std::string> ids{"negbin",          "negbin-mixture", "skew-normal",
                                            "skew-normal-mixture", "gaussian-copula", "t-copula",
                                            "vi-normal-identity"};
  return ids;
}

MapDescriptor MapDescriptor::from_id(const std::string& id, int dim, int components) {
  if (id == "negbin") return negbin();
  if (id == "negbin-mixture") return negbin_mixture(components);
  if (id == "skew-normal") return skew_normal(dim);
  if (id == "skew-normal-mixture") return skew_normal_mixture(components, dim);
  if (id == "gaussian-copula") return gaussian_copula(dim);
  if (id == "t-copula") return t_copula(dim);
  if (id == "vi-normal-identity") return identity(FamilyDescriptor::normal(dim));
  throw ConfigError("unknown map identifier '" + id + "'");
}

Index MapDescriptor::target_size() const {
  return target_ ? target_->flat_size() : surrogate_.standard_size();
}

Index MapDescriptor::aux_size() const {
  switch (kind_) {
    case MapKind::kSkewNormal:
      return surrogate_.dim();
    case MapKind::kSkewNormalMixture:
      return static_cast<Index>(surrogate_.components()) * surrogate_.dim();
    case MapKind::kTCopula:
      return 1;
    default:
      return 0;
  }
}

// ---------------------------------------------------------------------------
// Forward, pullback, inverse
// ---------------------------------------------------------------------------

Vec map_forward(const MapDescriptor& map, const StandardParams& surrogate, const Vec& aux) {
  check_surrogate(map, surrogate);
  check_aux(map, aux);
  const Vec& s = surrogate.values();
  const int d = map.surrogate().dim();
  switch (map.kind()) {
    case MapKind::kIdentity:
      return s;
    case MapKind::kNegBin:
      return negbin_forward(s);
    case MapKind::kNegBinMixture: {
      const int k = map.surrogate().components();
      Vec out = s;
      for (int j = 0; j < k; ++j) out.segment(k + 2 * j, 2) = negbin_forward(s.segment(k + 2 * j, 2));
      return out;
    }
    case MapKind::kSkewNormal: {
      Vec out(s.size() + d);
      out << s, aux;
      return out;
    }
    case MapKind::kSkewNormalMixture: {
      const int k = map.surrogate().components();
      const Index b = d + d * d;
      Vec out(map.target_size());
      out.head(k) = s.head(k);
      for (int j = 0; j < k; ++j) {
        out.segment(k + j * (b + d), b) = s.segment(k + j * b, b);
        out.segment(k + j * (b + d) + b, d) = aux.segment(j * d, d);
      }
      return out;
    }
    case MapKind::kGaussianCopula:
    case MapKind::kTCopula: {
      Vec out(map.target_size());
      out.head(d * d) = flat(numerics::correlation_from_covariance(block_matrix(s, 0, d)));
      if (map.kind() == MapKind::kTCopula) out[d * d] = 2.0 + std::exp(aux[0]);
      return out;
    }
  }
  throw std::logic_error("map_forward: unknown map");
}

MapCotangent map_pullback(const MapDescriptor& map, const StandardParams& surrogate, const Vec& aux,
                          const Vec& cot_target) {
  check_surrogate(map, surrogate);
  check_aux(map, aux);
  if (cot_target.size() != map.target_size()) throw ShapeError(map.id() + ": wrong target cotangent size");
  const Vec& s = surrogate.values();
  const int d = map.surrogate().dim();
  MapCotangent out{Vec::Zero(s.size()), Vec::Zero(aux.size())};
  switch (map.kind()) {
    case MapKind::kIdentity:
      out.surrogate = cot_target;
      break;
    case MapKind::kNegBin:
      out.surrogate = negbin_pullback(s, cot_target);
      break;
    case MapKind::kNegBinMixture: {
      const int k = map.surrogate().components();
      out.surrogate.head(k) = cot_target.head(k);
      for (int j = 0; j < k; ++j) {
        out.surrogate.segment(k + 2 * j, 2) = negbin_pullback(s.segment(k + 2 * j, 2), cot_target.segment(k + 2 * j, 2));
      }
      break;
    }
    case MapKind::kSkewNormal:
      out.surrogate = cot_target.head(s.size());
      out.aux = cot_target.tail(d);
      break;
    case MapKind::kSkewNormalMixture: {
      const int k = map.surrogate().components();
      const Index b = d + d * d;
      out.surrogate.head(k) = cot_target.head(k);
      for (int j = 0; j < k; ++j) {
        out.surrogate.segment(k + j * b, b) = cot_target.segment(k + j * (b + d), b);
        out.aux.segment(j * d, d) = cot_target.segment(k + j * (b + d) + b, d);
      }
      break;
    }
    case MapKind::kGaussianCopula:
    case MapKind::kTCopula:
      out.surrogate = flat(numerics::correlation_pullback(block_matrix(s, 0, d), block_matrix(cot_target, 0, d)));
      if (map.kind() == MapKind::kTCopula) out.aux[0] = cot_target[d * d] * std::exp(aux[0]);
      break;
  }
  return out;
}

MapPreimage map_inverse(const MapDescriptor& map, const Vec& target) {
  if (target.size() != map.target_size()) throw ShapeError(map.id() + ": wrong target size");
  if (map.target()) targets::validate(*map.target(), target);
  const int d = map.surrogate().dim();
  const auto& fam = map.surrogate();
  switch (map.kind()) {
    case MapKind::kIdentity:
      return {StandardParams(fam, target), Vec()};
    case MapKind::kNegBin:
      return {StandardParams(fam, Vec{{target[0] * (1.0 - target[1]), target[1]}}), Vec()};
    case MapKind::kNegBinMixture: {
      const int k = fam.components();
      Vec s = target;
      for (int j = 0; j < k; ++j) s[k + 2 * j] = target[k + 2 * j] * (1.0 - target[k + 2 * j + 1]);
      return {StandardParams(fam, s), Vec()};
    }
    case MapKind::kSkewNormal:
      return {StandardParams(fam, target.head(d + d * d)), target.tail(d)};
    case MapKind::kSkewNormalMixture: {
      const int k = fam.components();
      const Index b = d + d * d;
      Vec s(fam.standard_size()), aux(map.aux_size());
      s.head(k) = target.head(k);
      for (int j = 0; j < k; ++j) {
        s.segment(k + j * b, b) = target.segment(k + j * (b + d), b);
        aux.segment(j * d, d) = target.segment(k + j * (b + d) + b, d);
      }
      return {StandardParams(fam, s), aux};
    }
    case MapKind::kGaussianCopula:
      return {StandardParams(fam, target), Vec()};
    case MapKind::kTCopula:
      return {StandardParams(fam, target.head(d * d)), Vec{{std::log(target[d * d] - 2.0)}}};
  }
  throw std::logic_error("map_inverse: unknown map");
}

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

bool standard_predicate(const MapDescriptor& map, const StandardParams& surrogate) {
  const Vec& s = surrogate.values();
  switch (map.kind()) {
    case MapKind::kNegBin:
      return s[1] < 1.0;
    case MapKind::kNegBinMixture: {
      const int k = map.surrogate().components();
      for (int j = 0; j < k; ++j) {
        if (!(s[k + 2 * j + 1] < 1.0)) return false;
      }
      return true;
    }
    default:
      return true;
  }
}

bool domain_check(const MapDescriptor& map, const MeanParams& mu) {
  try {
    if (mu.family() != map.surrogate() || !mu.values().allFinite()) return false;
    return standard_predicate(map, expfam::to_standard(expfam::to_natural(mu)));
  } catch (const Error&) {
    return false;
  }
}

bool domain_check(const MapDescriptor& map, const NaturalParams& eta) {
  try {
    if (eta.family() != map.surrogate() || !eta.values().allFinite()) return false;
    return standard_predicate(map, expfam::to_standard(eta));
  } catch (const Error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

ChainPoint chain_forward(const MapDescriptor& map, Coordinates coords, const Vec& theta_tilde, const Vec& aux) {
  const auto& fam = map.surrogate();
  if (coords == Coordinates::kStandard) throw DomainError("chain_forward: θ̃ must be mean or natural");
  if (!theta_tilde.allFinite()) throw DomainError(map.id() + ": non-finite surrogate parameters");
  auto build = [&](NaturalParams eta, MeanParams mu) {
    StandardParams s = expfam::to_standard(eta);
    if (!standard_predicate(map, s)) throw DomainError(map.id() + ": surrogate outside the map domain");
    Vec target = map_forward(map, s, aux);
    return ChainPoint{coords, std::move(eta), std::move(mu), std::move(s), aux, std::move(target)};
  };
  if (coords == Coordinates::kMean) {
    MeanParams mu(fam, theta_tilde);
    NaturalParams eta = expfam::to_natural(mu);
    return build(std::move(eta), std::move(mu));
  }
  NaturalParams eta(fam, theta_tilde);
  MeanParams mu = expfam::to_mean(eta);
  return build(std::move(eta), std::move(mu));
}

ChainGradient chain_pullback(const MapDescriptor& map, const ChainPoint& point, const Vec& cot_target,
                             ChainPath path) {
  auto cot = map_pullback(map, point.standard, point.aux, cot_target);
  ChainGradient out;
  out.aux = std::move(cot.aux);
  if (point.coords == Coordinates::kMean) {
    out.plain = expfam::to_standard_pullback(point.mu, cot.surrogate);
    out.direction = path == ChainPath::kFused ? expfam::to_standard_pullback(point.eta, cot.surrogate)
                                              : expfam::pullback_to_mean(point.eta, out.plain);
  } else {
    out.plain = expfam::to_standard_pullback(point.eta, cot.surrogate);
    out.direction = path == ChainPath::kFused ? expfam::to_standard_pullback(point.mu, cot.surrogate)
                                              : expfam::pullback_to_natural(point.mu, out.plain);
  }
  out.standard = std::move(cot.surrogate);
  return out;
}

}  // namespace sngd::maps
