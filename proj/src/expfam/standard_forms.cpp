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

#include <cmath>

#include "sngd/expfam.hpp"

namespace sngd::expfam {
namespace {

using Index = Eigen::Index;

Vec pack(const Vec& head, const Mat& m) {
  Vec out(head.size() + m.size());
  out.head(head.size()) = head;
  Eigen::Map<Mat>(out.data() + head.size(), m.rows(), m.cols()) = m;
  return out;
}

double log_sum_exp(const Vec& a) {
  const double mx = a.maxCoeff();
  return mx + std::log((a.array() - mx).exp().sum());
}

}  // namespace

StandardParams make_gamma(double shape, double rate) {
  return {FamilyDescriptor::gamma(), Vec{{shape, rate}}};
}

StandardParams make_normal(const Vec& mean, const Mat& cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw ShapeError("make_normal: covariance shape does not match mean");
  }
  return {FamilyDescriptor::normal(static_cast<int>(mean.size())), pack(mean, cov)};
}

StandardParams make_zero_mean_normal(const Mat& cov) {
  if (cov.rows() != cov.cols()) throw ShapeError("make_zero_mean_normal: covariance must be square");
  return {FamilyDescriptor::zero_mean_normal(static_cast<int>(cov.rows())), pack(Vec(), cov)};
}

StandardParams make_mixture(const FamilyDescriptor& component, const Vec& weights,
                            const std::vector<StandardParams>& components) {
  const int k = static_cast<int>(weights.size());
  if (static_cast<int>(components.size()) != k) {
    throw ShapeError("make_mixture: weights and components differ in length");
  }
  const auto family = FamilyDescriptor::mixture(k, component);
  const Index sc = component.standard_size();
  Vec values(family.standard_size());
  values.head(k) = weights;
  for (int i = 0; i < k; ++i) {
    if (components[i].family() != component) throw ShapeError("make_mixture: component family mismatch");
    values.segment(k + i * sc, sc) = components[i].values();
  }
  return {family, values};
}

GammaStandard as_gamma(const StandardParams& p) {
  if (p.family().kind() != FamilyKind::kGamma) throw ShapeError("as_gamma: not a gamma family");
  return {p.values()[0], p.values()[1]};
}

NormalStandard as_normal(const StandardParams& p) {
  const auto& f = p.family();
  const int d = f.dim();
  if (f.kind() == FamilyKind::kNormal) {
    return {p.values().head(d), Eigen::Map<const Mat>(p.values().data() + d, d, d)};
  }
  if (f.kind() == FamilyKind::kZeroMeanNormal) {
    return {Vec::Zero(d), Eigen::Map<const Mat>(p.values().data(), d, d)};
  }
  throw ShapeError("as_normal: not a normal family");
}

MixtureStandard as_mixture(const StandardParams& p) {
  const auto& f = p.family();
  if (f.kind() != FamilyKind::kMixture) throw ShapeError("as_mixture: not a mixture family");
  const int k = f.components();
  const Index sc = f.component().standard_size();
  MixtureStandard out;
  out.weights = p.values().head(k);
  for (int i = 0; i < k; ++i) out.components.emplace_back(f.component(), p.values().segment(k + i * sc, sc));
  return out;
}

Vec sufficient_statistics(const FamilyDescriptor& family, const Vec& x) {
  switch (family.kind()) {
    case FamilyKind::kGamma:
      if (x.size() != 1 || !(x[0] > 0.0)) throw DomainError("gamma statistics need a single x > 0");
      return Vec{{x[0], std::log(x[0])}};
    case FamilyKind::kNormal:
      if (x.size() != family.dim()) throw ShapeError("normal statistics: dimension mismatch");
      return pack(x, x * x.transpose());
    case FamilyKind::kZeroMeanNormal:
      if (x.size() != family.dim()) throw ShapeError("normal statistics: dimension mismatch");
      return pack(Vec(), x * x.transpose());
    case FamilyKind::kMixture:
      break;
  }
  throw DomainError("sufficient_statistics: use log_joint_density for mixture models");
}

double log_density(const NaturalParams& eta, const Vec& x) {
  return sufficient_statistics(eta.family(), x).dot(eta.values()) - log_partition(eta);
}

double log_joint_density(const NaturalParams& eta, int z, const Vec& x) {
  const auto& f = eta.family();
  if (f.kind() != FamilyKind::kMixture) throw ShapeError("log_joint_density: not a mixture family");
  const int k = f.components();
  if (z < 0 || z >= k) throw DomainError("log_joint_density: z out of range");
  const Index pc = f.component().param_size();
  const Vec t = sufficient_statistics(f.component(), x);
  const double indicator_term = z < k - 1 ? eta.values()[z] : 0.0;
  return indicator_term + t.dot(eta.values().segment(k - 1 + z * pc, pc)) - log_partition(eta);
}

double log_marginal_density(const NaturalParams& eta, const Vec& x) {
  const int k = eta.family().components();
  Vec terms(k);
  for (int z = 0; z < k; ++z) terms[z] = log_joint_density(eta, z, x);
  return log_sum_exp(terms);
}

Mat sample(const StandardParams& s, Eigen::Index count, Rng& rng) {
  const auto& f = s.family();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = as_gamma(s);
      std::gamma_distribution<double> dist(g.shape, 1.0 / g.rate);
      Mat out(count, 1);
      for (Index i = 0; i < count; ++i) out(i, 0) = dist(rng);
      return out;
    }
    case FamilyKind::kNormal:
    case FamilyKind::kZeroMeanNormal: {
      const auto n = as_normal(s);
      const numerics::SpdMatrix cov(n.cov);
      const Mat& l = cov.cholesky().matrix();
      Mat out(count, f.dim());
      for (Index i = 0; i < count; ++i) {
        out.row(i) = (n.mean + l * standard_normal_vector(f.dim(), rng)).transpose();
      }
      return out;
    }
    case FamilyKind::kMixture:
      break;
  }
  throw DomainError("sample: mixture models are sampled through their components");
}

}  // namespace sngd::expfam
