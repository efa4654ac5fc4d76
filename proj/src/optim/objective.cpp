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

#include "sngd/optim.hpp"

namespace sngd::optim {

Objective::Objective(Fn fn, bool stochastic) : fn_(std::move(fn)), stochastic_(stochastic) {
  if (!fn_) throw ConfigError("objective: empty evaluation function");
}

ObjectiveValue Objective::evaluate(const Vec& theta, std::uint64_t seed, bool with_grad) const {
  ObjectiveValue out = fn_(theta, seed, with_grad);
  if (with_grad && out.gradient.size() != theta.size()) {
    throw ShapeError("objective: gradient size differs from parameter size");
  }
  return out;
}

double Objective::value(const Vec& theta, std::uint64_t seed) const { return evaluate(theta, seed, false).value; }

Parameterization Parameterization::identity() {
  return {[](const Vec& u) { return u; }, [](const Vec&, const Vec& c) { return c; }};
}

Parameterization Parameterization::unconstrained(const targets::TargetDescriptor& target) {
  return {[target](const Vec& u) { return targets::flat_from_free(target, u); },
          [target](const Vec& u, const Vec& c) { return targets::flat_from_free_pullback(target, u, c); }};
}

ScoreModel ScoreModel::for_target(const targets::TargetDescriptor& target) {
  return {[target](const Vec& theta, Eigen::Index n, Rng& rng) { return targets::sample(target, theta, n, rng); },
          [target](const Vec& theta, const Vec& x) {
            return targets::log_likelihood(target, theta, x.transpose()).grad;
          }};
}

StepSchedule StepSchedule::constant(double step) {
  if (!(step >= 0.0) || !std::isfinite(step)) throw ConfigError("step size must be a nonnegative number");
  StepSchedule s;
  s.kind = Kind::kConstant;
  s.value = step;
  return s;
}

StepSchedule StepSchedule::exact(LineSearchConfig config) {
  if (!(config.initial > 0.0) || !(config.growth > 1.0) || !(config.tolerance > 0.0)) {
    throw ConfigError("line search: initial > 0, growth > 1 and tolerance > 0 are required");
  }
  StepSchedule s;
  s.kind = Kind::kExactLineSearch;
  s.line_search = config;
  return s;
}

}  // namespace sngd::optim
