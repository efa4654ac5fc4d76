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
#include <memory>
#include <numbers>

#include "sngd/tasks.hpp"

namespace sngd::tasks {

using Eigen::Index;
using expfam::FamilyDescriptor;
using expfam::FamilyKind;
using optim::Objective;
using optim::ObjectiveValue;

namespace {

void check_support(const TargetDescriptor& target, const Dataset& data) {
  const std::string who = "support mismatch for " + target.name() + ": ";
  if (data.rows() == 0) throw DomainError(who + "empty dataset");
  if (data.cols() != target.dim()) {
    throw DomainError(who + "data has " + std::to_string(data.cols()) + " columns, expected " +
                      std::to_string(target.dim()));
  }
  if (target.discrete() && !data.counts()) throw DomainError(who + "count data required");
  if (target.kind() == targets::TargetKind::kGaussianCopula || target.kind() == targets::TargetKind::kTCopula) {
    const auto& x = data.values();
    if (!((x.array() > 0.0).all() && (x.array() < 1.0).all())) throw DomainError(who + "copula data must lie in (0, 1)");
  }
}

}  // namespace

Objective build_mle_objective(const TargetDescriptor& target, const Dataset& data) {
  check_support(target, data);
  // Continuous data rarely repeats, so only count data is compressed.
  auto rows = std::make_shared<const WeightedRows>(
      target.discrete() ? compress(data) : WeightedRows{data.values(), Vec()});
  return Objective(
      [target, rows](const Vec& theta, std::uint64_t, bool with_grad) {
        auto ev = targets::log_likelihood(target, theta, rows->rows, rows->weights, with_grad);
        ObjectiveValue out{-ev.value, Vec()};
        if (with_grad) out.gradient = -ev.grad;
        return out;
      },
      false);
}

Objective build_vi_objective(const LogRegModel& model, Index sample_count) {
  model.validate();
  if (sample_count < 1) throw ConfigError("vi: sample count must be at least 1");
  auto shared = std::make_shared<const LogRegModel>(model);
  return Objective(
      [shared, sample_count](const Vec& theta, std::uint64_t seed, bool with_grad) {
        const Index d = shared->dim();
        if (theta.size() != d + d * d) throw ShapeError("vi: expected (m, Σ) of size d + d²");
        const Vec m = theta.head(d);
        const numerics::SpdMatrix sigma(Eigen::Map<const Mat>(theta.data() + d, d, d));
        const Mat& l = sigma.cholesky().matrix();
        const double log_q_const =
            -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * sigma.log_det();
        Rng rng(seed);
        double total = 0.0;
        Vec grad_m = Vec::Zero(d);
        Mat grad_l = Mat::Zero(d, d);
        for (Index s = 0; s < sample_count; ++s) {
          const Vec eps = standard_normal_vector(d, rng);
          const Vec x = m + l * eps;
          const auto joint = targets::logreg_logjoint_grad(*shared, x);
          total += log_q_const - 0.5 * eps.squaredNorm() - joint.value;
          if (with_grad) {
            grad_m -= joint.grad;
            grad_l -= joint.grad * eps.transpose();
          }
        }
        const double inv = 1.0 / static_cast<double>(sample_count);
        ObjectiveValue out{total * inv, Vec()};
        if (with_grad) {
          // log q(m + Lε) depends on (m, Σ) only through -½ log|Σ|.
          const Mat grad_sigma = numerics::cholesky_pullback(l, grad_l * inv) - 0.5 * sigma.inverse();
          out.gradient.resize(d + d * d);
          out.gradient.head(d) = grad_m * inv;
          out.gradient.tail(d * d) = Eigen::Map<const Vec>(grad_sigma.data(), d * d);
        }
        return out;
      },
      true);
}

Vec mean_statistic(const FamilyDescriptor& family, const Mat& x, const std::vector<int>& z) {
  if (x.rows() == 0) throw DomainError("mean_statistic: no observations");
  const double n = static_cast<double>(x.rows());
  if (family.kind() != FamilyKind::kMixture) {
    Vec t = Vec::Zero(family.param_size());
    for (Index i = 0; i < x.rows(); ++i) t += expfam::sufficient_statistics(family, x.row(i).transpose());
    return t / n;
  }
  if (static_cast<Index>(z.size()) != x.rows()) throw ShapeError("mean_statistic: one component label per row");
  const int k = family.components();
  const Index pc = family.component().param_size();
  Vec t = Vec::Zero(family.param_size());
  for (Index i = 0; i < x.rows(); ++i) {
    const int c = z[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k) throw DomainError("mean_statistic: component label out of range");
    if (c < k - 1) t[c] += 1.0;
    t.segment(k - 1 + c * pc, pc) += expfam::sufficient_statistics(family.component(), x.row(i).transpose());
  }
  return t / n;
}

Objective ef_mle_objective(const FamilyDescriptor& family, const Vec& t_bar) {
  if (t_bar.size() != family.param_size()) throw ShapeError("ef_mle: statistic size mismatch");
  return Objective(
      [family, t_bar](const Vec& s, std::uint64_t, bool with_grad) {
        const expfam::StandardParams sp(family, s);
        if (!expfam::in_domain(sp)) throw DomainError("ef_mle: parameters outside the domain");
        const auto eta = expfam::natural_from_standard(sp);
        ObjectiveValue out{expfam::log_partition(eta) - eta.values().dot(t_bar), Vec()};
        if (with_grad) {
          const Vec mu = expfam::to_mean(eta).values();
          out.gradient = expfam::natural_from_standard_pullback(sp, mu - t_bar);
        }
        return out;
      },
      false);
}

Objective ef_kl_objective(const expfam::NaturalParams& eta_star) {
  if (!expfam::in_domain(eta_star)) throw DomainError("ef_kl: reference parameters outside the domain");
  return Objective(
      [eta_star](const Vec& s, std::uint64_t, bool with_grad) {
        const expfam::StandardParams sp(eta_star.family(), s);
        if (!expfam::in_domain(sp)) throw DomainError("ef_kl: parameters outside the domain");
        const auto eta = expfam::natural_from_standard(sp);
        ObjectiveValue out{expfam::ef_kl(eta, eta_star), Vec()};
        if (with_grad) {
          // ∂KL/∂η = ∇²A(η)(η - η*)
          const Vec cot_eta = expfam::pullback_to_mean(eta, eta.values() - eta_star.values());
          out.gradient = expfam::natural_from_standard_pullback(sp, cot_eta);
        }
        return out;
      },
      false);
}

}  // namespace sngd::tasks
