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

#include "sngd/expfam.hpp"

namespace sngd::expfam {

FamilyDescriptor::FamilyDescriptor(FamilyKind kind, int dim, int components,
                                   std::shared_ptr<const FamilyDescriptor> component)
    : kind_(kind), dim_(dim), components_(components), component_(std::move(component)) {}

FamilyDescriptor FamilyDescriptor::gamma() { return {FamilyKind::kGamma, 1, 1, nullptr}; }

FamilyDescriptor FamilyDescriptor::normal(int dim) {
  if (dim < 1) throw DomainError("normal family: dimension must be >= 1");
  return {FamilyKind::kNormal, dim, 1, nullptr};
}

FamilyDescriptor FamilyDescriptor::zero_mean_normal(int dim) {
  if (dim < 1) throw DomainError("zero-mean normal family: dimension must be >= 1");
  return {FamilyKind::kZeroMeanNormal, dim, 1, nullptr};
}

FamilyDescriptor FamilyDescriptor::mixture(int components, const FamilyDescriptor& component) {
  if (components < 1) throw DomainError("mixture family: need at least one component");
  if (component.kind() == FamilyKind::kMixture) {
    throw DomainError("mixture family: components may not be mixtures");
  }
  return {FamilyKind::kMixture, component.dim(), components,
          std::make_shared<const FamilyDescriptor>(component)};
}

const FamilyDescriptor& FamilyDescriptor::component() const {
  if (!component_) throw DomainError(name() + " has no component family");
  return *component_;
}

Eigen::Index FamilyDescriptor::param_size() const {
  switch (kind_) {
    case FamilyKind::kGamma:
      return 2;
    case FamilyKind::kNormal:
      return dim_ + static_cast<Eigen::Index>(dim_) * dim_;
    case FamilyKind::kZeroMeanNormal:
      return static_cast<Eigen::Index>(dim_) * dim_;
    case FamilyKind::kMixture:
      return (components_ - 1) + components_ * component_->param_size();
  }
  return 0;
}

Eigen::Index FamilyDescriptor::standard_size() const {
  if (kind_ == FamilyKind::kMixture) return components_ + components_ * component_->standard_size();
  return param_size();
}

std::string FamilyDescriptor::name() const {
  switch (kind_) {
    case FamilyKind::kGamma:
      return "gamma";
    case FamilyKind::kNormal:
      return "normal(" + std::to_string(dim_) + ")";
    case FamilyKind::kZeroMeanNormal:
      return "zero-mean-normal(" + std::to_string(dim_) + ")";
    case FamilyKind::kMixture:
      return "mixture(" + std::to_string(components_) + ", " + component_->name() + ")";
  }
  return "unknown";
}

bool FamilyDescriptor::operator==(const FamilyDescriptor& other) const {
  if (kind_ != other.kind_ || dim_ != other.dim_ || components_ != other.components_) return false;
  if (kind_ == FamilyKind::kMixture) return *component_ == *other.component_;
  return true;
}

Eigen::Index mixture_block_offset(const FamilyDescriptor& mixture, Coordinates coords, int i) {
  if (mixture.kind() != FamilyKind::kMixture) throw DomainError("not a mixture family");
  const int k = mixture.components();
  if (i < 0 || i >= k) throw DomainError("mixture component index out of range");
  if (coords == Coordinates::kStandard) return k + i * mixture.component().standard_size();
  return (k - 1) + i * mixture.component().param_size();
}

}  // namespace sngd::expfam
