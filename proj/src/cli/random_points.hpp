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


#ifndef SNGD_CLI_RANDOM_POINTS_HPP
#define SNGD_CLI_RANDOM_POINTS_HPP

#include <random>
#include <vector>

#include "sngd/expfam.hpp"

// Seeded parameter points and tangent vectors shared by the self-check
// suites.
namespace sngd::cli::detail {

using Index = Eigen::Index;
using expfam::FamilyDescriptor;
using expfam::FamilyKind;

inline Vec flat(const Mat& m) { return m.reshaped(); }

inline Mat random_spd(Index d, Rng& rng, double ridge) {
  const Mat w = standard_normal_vector(d * d, rng).reshaped(d, d);
  const Mat s = w.transpose() * w / static_cast<double>(d) + ridge * Mat::Identity(d, d);
  return 0.5 * (s + s.transpose());
}

inline Mat random_symmetric(Index d, Rng& rng) {
  const Mat m = standard_normal_vector(d * d, rng).reshaped(d, d);
  return 0.5 * (m + m.transpose());
}

// Standard parameters inside the map domains (gamma rates below one).
inline Vec random_standard_block(const FamilyDescriptor& f, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma:
      return Vec{{0.5 + 6.0 * u(rng), 0.05 + 0.9 * u(rng)}};
    case FamilyKind::kNormal: {
      Vec v(d + d * d);
      v << standard_normal_vector(d, rng), flat(random_spd(d, rng, 0.5));
      return v;
    }
    case FamilyKind::kZeroMeanNormal:
      return flat(random_spd(d, rng, 0.5));
    case FamilyKind::kMixture:
      break;
  }
  throw ShapeError("gradient suite: unexpected family");
}

inline expfam::StandardParams random_standard(const FamilyDescriptor& f, Rng& rng) {
  if (f.kind() != FamilyKind::kMixture) return {f, random_standard_block(f, rng)};
  const int k = f.components();
  Vec v(f.standard_size());
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (int j = 0; j < k; ++j) v[j] = u(rng);
  v.head(k) /= v.head(k).sum();
  const Index b = f.component().standard_size();
  for (int j = 0; j < k; ++j) v.segment(k + j * b, b) = random_standard_block(f.component(), rng);
  return {f, v};
}

// Tangent vectors that keep matrix blocks symmetric and, in standard
// coordinates, mixture weights summing to one.
inline Vec tangent(const FamilyDescriptor& f, Rng& rng, bool standard) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma:
      return standard_normal_vector(2, rng);
    case FamilyKind::kNormal: {
      Vec v(d + d * d);
      v << standard_normal_vector(d, rng), flat(random_symmetric(d, rng));
      return v;
    }
    case FamilyKind::kZeroMeanNormal:
      return flat(random_symmetric(d, rng));
    case FamilyKind::kMixture: {
      const int k = f.components();
      const Index head = standard ? k : k - 1;
      const Index b = standard ? f.component().standard_size() : f.component().param_size();
      Vec v(head + k * b);
      v.head(head) = standard_normal_vector(head, rng);
      if (standard) v.head(head).array() -= v.head(head).mean();
      for (int j = 0; j < k; ++j) v.segment(head + j * b, b) = tangent(f.component(), rng, standard);
      return v;
    }
  }
  return Vec();
}

// Complete-data draws (z, x); z is empty for non-mixtures.
struct Draws {
  Mat x;
  std::vector<int> z;
};

inline Draws draw(const FamilyDescriptor& f, const expfam::StandardParams& s, Index n, Rng& rng) {
  if (f.kind() != FamilyKind::kMixture) return {expfam::sample(s, n, rng), {}};
  const auto mix = expfam::as_mixture(s);
  std::discrete_distribution<int> pick(mix.weights.data(), mix.weights.data() + mix.weights.size());
  Draws out{Mat(n, f.dim()), {}};
  for (Index i = 0; i < n; ++i) {
    const int z = pick(rng);
    out.z.push_back(z);
    out.x.row(i) = expfam::sample(mix.components[static_cast<std::size_t>(z)], 1, rng).row(0);
  }
  return out;
}

}  // namespace sngd::cli::detail

#endif  // SNGD_CLI_RANDOM_POINTS_HPP
