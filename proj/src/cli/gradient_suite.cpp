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

#include "cli/random_points.hpp"
#include "sngd/cli.hpp"

namespace sngd::cli {
namespace {

using Index = Eigen::Index;
using expfam::Coordinates;
using expfam::FamilyDescriptor;
using expfam::FamilyKind;
using maps::MapDescriptor;
using targets::TargetDescriptor;
using namespace detail;

std::vector<MapDescriptor> bundled_maps() {
  return {MapDescriptor::negbin(),           MapDescriptor::negbin_mixture(3),
          MapDescriptor::skew_normal(3),     MapDescriptor::skew_normal_mixture(2, 2),
          MapDescriptor::gaussian_copula(3), MapDescriptor::t_copula(3)};
}

// Target cotangents, symmetric on the matrix blocks.
Vec target_cotangent(const MapDescriptor& m, Rng& rng) {
  Vec c = standard_normal_vector(m.target_size(), rng);
  const int d = m.surrogate().dim();
  auto symmetrize_at = [&](Index offset) {
    Eigen::Map<Mat> b(c.data() + offset, d, d);
    const Mat s = 0.5 * (b + b.transpose());
    b = s;
  };
  switch (m.kind()) {
    case maps::MapKind::kSkewNormal:
    case maps::MapKind::kIdentity:
      symmetrize_at(d);
      break;
    case maps::MapKind::kSkewNormalMixture: {
      const int k = m.surrogate().components();
      for (int j = 0; j < k; ++j) symmetrize_at(k + j * (2 * d + d * d) + d);
      break;
    }
    case maps::MapKind::kGaussianCopula:
    case maps::MapKind::kTCopula:
      symmetrize_at(0);
      break;
    default:
      break;
  }
  return c;
}

double rel(double got, double want) { return std::fabs(got - want) / std::max(1.0, std::fabs(want)); }

double slope(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& v, double h) {
  return (f(x + h * v) - f(x - h * v)) / (2.0 * h);
}

// The log-likelihood of a few samples drawn at θ₀, as the smooth objective
// every check differentiates.
struct SampleObjective {
  TargetDescriptor target;
  Mat x;
  bool flip = false;

  double value(const Vec& theta) const { return targets::log_likelihood(target, theta, x, Vec(), false).value; }
  Vec gradient(const Vec& theta) const {
    Vec g = targets::log_likelihood(target, theta, x).grad;
    if (flip) g = -g;
    return g;
  }
};

SampleObjective sample_objective(const TargetDescriptor& t, const Vec& theta0, Rng& rng,
                                 const GradSuiteOptions& options) {
  return {t, targets::sample(t, theta0, 8, rng), options.flip_negbin_gradient && t == TargetDescriptor::negbin()};
}

GradItem check_target(const MapDescriptor& m, const GradSuiteOptions& options, Rng& rng) {
  const auto t = *m.target();
  GradItem item;
  item.scope = "targets";
  item.name = t.name();
  for (int p = 0; p < options.points; ++p) {
    const Vec theta = maps::map_forward(m, random_standard(m.surrogate(), rng), 0.5 * standard_normal_vector(m.aux_size(), rng));
    const auto obj = sample_objective(t, theta, rng, options);
    const Vec u = targets::free_from_flat(t, theta);
    const Vec g = targets::flat_from_free_pullback(t, u, obj.gradient(theta));
    const auto report = optim::grad_check([&](const Vec& v) { return obj.value(targets::flat_from_free(t, v)); }, g,
                                          u, 1e-5, options.tolerance);
    item.worst_rel_error = std::max(item.worst_rel_error, report.max_rel_error);
  }
  return item;
}

GradItem check_map(const MapDescriptor& m, const GradSuiteOptions& options, Rng& rng) {
  GradItem item;
  item.scope = "maps";
  item.name = m.id();
  const double h = 1e-6;
  for (int p = 0; p < options.points; ++p) {
    const auto s = random_standard(m.surrogate(), rng);
    const Vec aux = 0.5 * standard_normal_vector(m.aux_size(), rng);
    const Vec ds = tangent(m.surrogate(), rng, true);
    const Vec da = standard_normal_vector(m.aux_size(), rng);
    const Vec c = target_cotangent(m, rng);
    const Vec jv = (maps::map_forward(m, {m.surrogate(), s.values() + h * ds}, aux + h * da) -
                    maps::map_forward(m, {m.surrogate(), s.values() - h * ds}, aux - h * da)) /
                   (2.0 * h);
    const auto cot = maps::map_pullback(m, s, aux, c);
    item.worst_rel_error = std::max(item.worst_rel_error, rel(cot.surrogate.dot(ds) + cot.aux.dot(da), c.dot(jv)));
  }
  return item;
}

GradItem check_chain(const MapDescriptor& m, Coordinates coords, const GradSuiteOptions& options, Rng& rng) {
  GradItem item;
  item.scope = "chain";
  item.name = m.id() + (coords == Coordinates::kMean ? " (mean)" : " (natural)");
  const double h = 1e-6;
  const Coordinates dual = coords == Coordinates::kMean ? Coordinates::kNatural : Coordinates::kMean;
  for (int p = 0; p < options.points; ++p) {
    const auto s = random_standard(m.surrogate(), rng);
    const Vec aux = 0.5 * standard_normal_vector(m.aux_size(), rng);
    const Vec theta_tilde = coords == Coordinates::kMean ? expfam::mean_from_standard(s).values()
                                                         : expfam::natural_from_standard(s).values();
    const auto point = maps::chain_forward(m, coords, theta_tilde, aux);
    const auto obj = sample_objective(*m.target(), point.target, rng, options);
    const auto g = maps::chain_pullback(m, point, obj.gradient(point.target));
    auto through = [&](Coordinates c, const Vec& lambda) {
      return [&, c, lambda](const Vec& x) { return obj.value(maps::chain_forward(m, c, x, lambda).target); };
    };

    const Vec v = tangent(m.surrogate(), rng, false);
    double worst = rel(g.plain.dot(v), slope(through(coords, aux), theta_tilde, v, h));
    const Vec dual_point = coords == Coordinates::kMean ? point.eta.values() : point.mu.values();
    worst = std::max(worst, rel(g.direction.dot(v), slope(through(dual, aux), dual_point, v, h)));
    if (m.aux_size() > 0) {
      const Vec a = standard_normal_vector(m.aux_size(), rng);
      const double fd =
          slope([&](const Vec& l) { return obj.value(maps::chain_forward(m, coords, theta_tilde, l).target); }, aux,
                a, h);
      worst = std::max(worst, rel(g.aux.dot(a), fd));
    }
    item.worst_rel_error = std::max(item.worst_rel_error, worst);
  }
  return item;
}

}  // namespace

GradScope parse_scope(const std::string& name) {
  if (name == "targets") return GradScope::kTargets;
  if (name == "maps") return GradScope::kMaps;
  if (name == "chain") return GradScope::kChain;
  if (name == "all") return GradScope::kAll;
  throw ConfigError("unknown gradcheck scope '" + name + "' (expected targets, maps, chain or all)");
}

std::vector<GradItem> gradient_suite(GradScope scope, const GradSuiteOptions& options) {
  std::vector<GradItem> items;
  Rng rng(options.seed);
  auto wants = [&](GradScope s) { return scope == GradScope::kAll || scope == s; };
  const auto all_maps = bundled_maps();
  if (wants(GradScope::kTargets)) {
    for (const auto& m : all_maps) items.push_back(check_target(m, options, rng));
    items.push_back(check_target(MapDescriptor::identity(FamilyDescriptor::normal(2)), options, rng));
  }
  if (wants(GradScope::kMaps)) {
    for (const auto& m : all_maps) items.push_back(check_map(m, options, rng));
  }
  if (wants(GradScope::kChain)) {
    for (const auto& m : all_maps) {
      for (auto coords : {Coordinates::kMean, Coordinates::kNatural}) items.push_back(check_chain(m, coords, options, rng));
    }
  }
  for (auto& item : items) item.passed = std::isfinite(item.worst_rel_error) && item.worst_rel_error <= options.tolerance;
  return items;
}

}  // namespace sngd::cli
