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
#include <limits>

#include "sngd/optim.hpp"

namespace sngd::optim {

using expfam::Coordinates;

namespace {

constexpr int kMaxBacktracks = 30;
constexpr double kInf = std::numeric_limits<double>::infinity();

void adam_update(Vec& x, Vec& m, Vec& v, const Vec& g, int t, const AdamConfig& c, double lr) {
  if (m.size() != x.size()) m = Vec::Zero(x.size());
  if (v.size() != x.size()) v = Vec::Zero(x.size());
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, t), bc2 = 1.0 - std::pow(c.beta2, t);
  x.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
}

void require_finite(const Vec& g, const std::string& who) {
  if (!g.allFinite()) throw DomainError(who + ": non-finite gradient");
}

double norm2(const Vec& a, const Vec& b) { return std::sqrt(a.squaredNorm() + b.squaredNorm()); }

// Step-size search for first-order baselines, whose coordinates have no
// domain boundary apart from numerical overflow.
StepInfo search_along(Vec& u, const Vec& direction, const StepSchedule& schedule,
                      const std::function<double(const Vec&)>& value) {
  if (schedule.kind == StepSchedule::Kind::kConstant) {
    u -= schedule.value * direction;
    return {schedule.value, 0, false};
  }
  try {
    const auto r = exact_line_search([&](double eps) { return value(u - eps * direction); }, schedule.line_search);
    u -= r.step * direction;
    return {r.step, r.infeasible, false};
  } catch (const NoDecrease&) {
    return {0.0, 0, true};
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SNGD
// ---------------------------------------------------------------------------

SngdStepper::SngdStepper(maps::MapDescriptor map, Coordinates coords, Objective objective, StepSchedule schedule,
                         AuxRule aux_rule)
    : map_(std::move(map)),
      coords_(coords),
      objective_(std::move(objective)),
      schedule_(schedule),
      aux_rule_(aux_rule) {
  if (coords_ == Coordinates::kStandard) throw ConfigError("sngd: θ̃ must use mean or natural coordinates");
  if (objective_.stochastic() && schedule_.kind == StepSchedule::Kind::kExactLineSearch) {
    throw ConfigError("sngd: exact line search needs a deterministic objective");
  }
}

bool SngdStepper::in_domain(const Vec& theta_tilde) const {
  const auto& fam = map_.surrogate();
  return coords_ == Coordinates::kMean ? maps::domain_check(map_, expfam::MeanParams(fam, theta_tilde))
                                       : maps::domain_check(map_, expfam::NaturalParams(fam, theta_tilde));
}

Probe SngdStepper::probe(const OptState& state, std::uint64_t seed) const {
  const auto point = maps::chain_forward(map_, coords_, state.theta, state.aux);
  const auto ev = objective_.evaluate(point.target, seed, true);
  auto g = maps::chain_pullback(map_, point, ev.gradient);
  require_finite(g.direction, "sngd");
  require_finite(g.aux, "sngd");
  Probe out;
  out.objective = ev.value;
  out.grad_norm = norm2(g.direction, g.aux);
  out.direction = std::move(g.direction);
  out.aux_gradient = std::move(g.aux);
  return out;
}

StepInfo SngdStepper::step(OptState& state, const Probe& probe, std::uint64_t seed) const {
  const bool has_aux = map_.aux_size() > 0;
  const bool coupled_aux = has_aux && aux_rule_.kind == AuxRule::Kind::kGd;
  StepInfo info;
  if (schedule_.kind == StepSchedule::Kind::kConstant) {
    double eps = schedule_.value;
    Vec candidate = state.theta - eps * probe.direction;
    while (!in_domain(candidate)) {
      if (info.backtracks == kMaxBacktracks) {
        throw DomainError("sngd: the step left the domain after " + std::to_string(kMaxBacktracks) + " halvings");
      }
      eps *= 0.5;
      ++info.backtracks;
      candidate = state.theta - eps * probe.direction;
    }
    state.theta = std::move(candidate);
    info.step_size = eps;
    if (coupled_aux) state.aux -= aux_rule_.step * probe.aux_gradient;
  } else {
    auto aux_at = [&](double eps) -> Vec {
      return coupled_aux ? Vec(state.aux - eps * aux_rule_.step * probe.aux_gradient) : state.aux;
    };
    auto phi = [&](double eps) {
      const Vec candidate = state.theta - eps * probe.direction;
      if (!in_domain(candidate)) return kInf;
      const auto point = maps::chain_forward(map_, coords_, candidate, aux_at(eps));
      return objective_.value(point.target, seed);
    };
    try {
      LineSearchConfig config = schedule_.line_search;
      if (state.last_step > 0.0) config.initial = state.last_step;
      const auto r = exact_line_search(phi, config);
      state.last_step = r.step;
      state.aux = aux_at(r.step);
      state.theta -= r.step * probe.direction;
      info.step_size = r.step;
      info.backtracks = r.infeasible;
    } catch (const NoDecrease&) {
      info.stalled = true;
      if (!has_aux || coupled_aux) {
        ++state.iteration;
        return info;
      }
    }
  }
  if (has_aux && aux_rule_.kind == AuxRule::Kind::kLineSearch) {
    const Vec& g = probe.aux_gradient;
    auto phi = [&](double eps) {
      const auto point = maps::chain_forward(map_, coords_, state.theta, Vec(state.aux - eps * g));
      return objective_.value(point.target, seed);
    };
    LineSearchConfig config = schedule_.line_search;
    config.initial = state.last_aux_step > 0.0 ? state.last_aux_step : aux_rule_.step;
    try {
      const auto r = exact_line_search(phi, config);
      state.aux -= r.step * g;
      state.last_aux_step = r.step;
      info.stalled = false;
    } catch (const NoDecrease&) {
    }
  } else if (has_aux && !coupled_aux) {
    adam_update(state.aux, state.adam_m, state.adam_v, probe.aux_gradient, state.iteration + 1, aux_rule_.adam,
                aux_rule_.step);
  }
  ++state.iteration;
  return info;
}

Vec SngdStepper::target(const OptState& state) const {
  return maps::chain_forward(map_, coords_, state.theta, state.aux).target;
}

OptState SngdStepper::initial_state(const Vec& target) const {
  const auto pre = maps::map_inverse(map_, target);
  OptState s;
  s.theta = coords_ == Coordinates::kMean ? expfam::mean_from_standard(pre.surrogate).values()
                                          : expfam::natural_from_standard(pre.surrogate).values();
  s.aux = pre.aux;
  if (!in_domain(s.theta)) throw DomainError("sngd: initial target parameters are outside the map domain");
  return s;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

GdStepper::GdStepper(Parameterization param, Objective objective, StepSchedule schedule)
    : param_(std::move(param)), objective_(std::move(objective)), schedule_(schedule) {
  if (objective_.stochastic() && schedule_.kind == StepSchedule::Kind::kExactLineSearch) {
    throw ConfigError("gd: exact line search needs a deterministic objective");
  }
}

Probe GdStepper::probe(const OptState& state, std::uint64_t seed) const {
  const auto ev = objective_.evaluate(param_.forward(state.theta), seed, true);
  Probe out;
  out.objective = ev.value;
  out.direction = param_.pullback(state.theta, ev.gradient);
  require_finite(out.direction, "gd");
  out.grad_norm = out.direction.norm();
  return out;
}

StepInfo GdStepper::step(OptState& state, const Probe& probe, std::uint64_t seed) const {
  auto info = search_along(state.theta, probe.direction, schedule_,
                           [&](const Vec& u) { return objective_.value(param_.forward(u), seed); });
  ++state.iteration;
  return info;
}

AdamStepper::AdamStepper(Parameterization param, Objective objective, AdamConfig config)
    : param_(std::move(param)), objective_(std::move(objective)), config_(config) {}

Probe AdamStepper::probe(const OptState& state, std::uint64_t seed) const {
  const auto ev = objective_.evaluate(param_.forward(state.theta), seed, true);
  Probe out;
  out.objective = ev.value;
  out.direction = param_.pullback(state.theta, ev.gradient);
  require_finite(out.direction, "adam");
  out.grad_norm = out.direction.norm();
  return out;
}

StepInfo AdamStepper::step(OptState& state, const Probe& probe, std::uint64_t) const {
  adam_update(state.theta, state.adam_m, state.adam_v, probe.direction, state.iteration + 1, config_,
              config_.learning_rate);
  ++state.iteration;
  return {config_.learning_rate, 0, false};
}

Vec fisher_solve(const Mat& scores, const Vec& gradient, double ridge_scale) {
  if (scores.cols() != gradient.size()) throw ShapeError("fisher_solve: score width differs from gradient size");
  if (scores.rows() == 0) throw DomainError("fisher_solve: no samples");
  Mat f = scores.transpose() * scores / static_cast<double>(scores.rows());
  const double tau = ridge_scale * f.trace() / static_cast<double>(f.rows());
  f.diagonal().array() += tau;
  Eigen::LLT<Mat> llt(f);
  if (llt.info() != Eigen::Success) throw SingularSystem("fisher_solve: Fisher estimate is singular after ridging");
  Vec d = llt.solve(gradient);
  if (!d.allFinite()) throw SingularSystem("fisher_solve: Fisher estimate is singular after ridging");
  return d;
}

NgdExactStepper::NgdExactStepper(Parameterization param, ScoreModel model, Objective objective,
                                 StepSchedule schedule, NgdExactConfig config)
    : param_(std::move(param)),
      model_(std::move(model)),
      objective_(std::move(objective)),
      schedule_(schedule),
      config_(config) {
  if (!model_.sample || !model_.score) throw ConfigError("ngd_exact: the target has no sampler");
  if (objective_.stochastic() && schedule_.kind == StepSchedule::Kind::kExactLineSearch) {
    throw ConfigError("ngd_exact: exact line search needs a deterministic objective");
  }
}

Mat NgdExactStepper::scores(const Vec& u, Eigen::Index count, std::uint64_t seed) const {
  if (u.size() > config_.max_dim) throw ConfigError("ngd_exact: parameter dimension exceeds the limit");
  const Vec theta = param_.forward(u);
  Rng rng(seed);
  const Mat x = model_.sample(theta, count, rng);
  Mat out(count, u.size());
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = param_.pullback(u, model_.score(theta, x.row(i).transpose())).transpose();
  return out;
}

Probe NgdExactStepper::probe(const OptState& state, std::uint64_t seed) const {
  const auto ev = objective_.evaluate(param_.forward(state.theta), seed, true);
  const Vec grad = param_.pullback(state.theta, ev.gradient);
  require_finite(grad, "ngd_exact");
  Probe out;
  out.objective = ev.value;
  out.direction = fisher_solve(scores(state.theta, config_.samples, derive_seed(seed, 1)), grad, config_.ridge_scale);
  out.grad_norm = out.direction.norm();
  return out;
}

StepInfo NgdExactStepper::step(OptState& state, const Probe& probe, std::uint64_t seed) const {
  auto info = search_along(state.theta, probe.direction, schedule_,
                           [&](const Vec& u) { return objective_.value(param_.forward(u), seed); });
  ++state.iteration;
  return info;
}

}  // namespace sngd::optim
