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

#ifndef SNGD_OPTIM_HPP
#define SNGD_OPTIM_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sngd/error.hpp"
#include "sngd/maps.hpp"

namespace sngd::optim {

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

struct ObjectiveValue {
  double value = 0.0;
  Vec gradient;  // empty when not requested
};

/// f(θ) and ∇f(θ) on flat target parameters. Stochastic objectives draw
/// their Monte Carlo samples from the seed; deterministic ones ignore it.
/// Evaluations outside the target domain throw DomainError.
class Objective {
 public:
  using Fn = std::function<ObjectiveValue(const Vec& theta, std::uint64_t seed, bool with_grad)>;

  Objective(Fn fn, bool stochastic);

  ObjectiveValue evaluate(const Vec& theta, std::uint64_t seed = 0, bool with_grad = true) const;
  double value(const Vec& theta, std::uint64_t seed = 0) const;
  bool stochastic() const noexcept { return stochastic_; }

 private:
  Fn fn_;
  bool stochastic_;
};

/// Optimisation coordinates u for the first-order baselines, with θ = h(u).
struct Parameterization {
  std::function<Vec(const Vec& u)> forward;
  /// Jᵀc of forward at u.
  std::function<Vec(const Vec& u, const Vec& cot)> pullback;

  static Parameterization identity();
  /// The target's unconstrained coordinates (log r, logit s, Cholesky
  /// factors, softmax logits, log(ν - 2)).
  static Parameterization unconstrained(const targets::TargetDescriptor& target);
};

// ---------------------------------------------------------------------------
// Step sizes
// ---------------------------------------------------------------------------

struct LineSearchConfig {
  double initial = 1.0;
  double growth = 2.0;
  /// Golden-section stops when the bracket is this small relative to the step.
  double tolerance = 1e-10;
  int max_evaluations = 200;
};

struct StepSchedule {
  enum class Kind { kConstant, kExactLineSearch };
  Kind kind = Kind::kConstant;
  double value = 1.0;
  LineSearchConfig line_search;

  static StepSchedule constant(double step);
  static StepSchedule exact(LineSearchConfig config = {});
};

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  int evaluations = 0;
  /// Trial steps that fell outside the domain.
  int infeasible = 0;
};

/// Minimises phi over ε > 0. Non-finite values and thrown sngd::Error mark
/// infeasible steps; the feasible set is assumed to be an interval [0, ε_max).
/// Brackets by geometric expansion (shrinking towards the feasibility
/// boundary when needed), then golden-section search. Throws NoDecrease when
/// no probed step improves on phi(0).
LineSearchResult exact_line_search(const std::function<double(double)>& phi, const LineSearchConfig& config = {});

// ---------------------------------------------------------------------------
// State and steppers
// ---------------------------------------------------------------------------

struct OptState {
  /// θ̃ for SNGD (mean or natural coordinates) or u for the baselines.
  Vec theta;
  Vec aux;
  /// Adam moments (over aux for SNGD, over theta for the Adam baseline).
  Vec adam_m;
  Vec adam_v;
  int iteration = 0;
  /// The last accepted line-search step; the next search starts there.
  double last_step = 0.0;
  double last_aux_step = 0.0;
};

/// One evaluation at the current state.
struct Probe {
  double objective = 0.0;
  Vec direction;  // the vector the step subtracts from theta
  Vec aux_gradient;
  double grad_norm = 0.0;
};

struct StepInfo {
  double step_size = 0.0;
  int backtracks = 0;
  /// The line search found no decrease; the state is unchanged.
  bool stalled = false;
};

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual std::string name() const = 0;
  virtual bool stochastic() const = 0;
  virtual Probe probe(const OptState& state, std::uint64_t seed) const = 0;
  /// Advances `state` from the point where `probe` was taken.
  virtual StepInfo step(OptState& state, const Probe& probe, std::uint64_t seed) const = 0;
  /// Target parameters at `state`.
  virtual Vec target(const OptState& state) const = 0;
};

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Update rule for auxiliary parameters. kLineSearch takes a separate exact
/// line search along the auxiliary gradient after the surrogate step.
struct AuxRule {
  enum class Kind { kGd, kAdam, kLineSearch };
  Kind kind = Kind::kAdam;
  /// GD step size, or the Adam learning rate. Under an exact line search
  /// with the GD rule, λ moves by (step × ε) along its gradient. The
  /// line-search rule uses it as the first trial step.
  double step = 1e-2;
  AdamConfig adam;
};

/// SNGD: θ̃ ← θ̃ - ε ∇̃ with ∇̃ the gradient of f(g(·)) at the dual
/// parameters, plus a first-order update of the auxiliary parameters from
/// the same pullback pass.
class SngdStepper final : public Stepper {
 public:
  SngdStepper(maps::MapDescriptor map, expfam::Coordinates coords, Objective objective, StepSchedule schedule,
              AuxRule aux_rule = {});

  std::string name() const override { return "sngd"; }
  bool stochastic() const override { return objective_.stochastic(); }
  Probe probe(const OptState& state, std::uint64_t seed) const override;
  StepInfo step(OptState& state, const Probe& probe, std::uint64_t seed) const override;
  Vec target(const OptState& state) const override;

  /// Initial state whose image under the map is `target`.
  OptState initial_state(const Vec& target) const;
  bool in_domain(const Vec& theta_tilde) const;
  const maps::MapDescriptor& map() const noexcept { return map_; }
  expfam::Coordinates coords() const noexcept { return coords_; }

 private:
  maps::MapDescriptor map_;
  expfam::Coordinates coords_;
  Objective objective_;
  StepSchedule schedule_;
  AuxRule aux_rule_;
};

/// Plain gradient descent in the coordinates of `param`.
class GdStepper final : public Stepper {
 public:
  GdStepper(Parameterization param, Objective objective, StepSchedule schedule);

  std::string name() const override { return "gd"; }
  bool stochastic() const override { return objective_.stochastic(); }
  Probe probe(const OptState& state, std::uint64_t seed) const override;
  StepInfo step(OptState& state, const Probe& probe, std::uint64_t seed) const override;
  Vec target(const OptState& state) const override { return param_.forward(state.theta); }

 private:
  Parameterization param_;
  Objective objective_;
  StepSchedule schedule_;
};

class AdamStepper final : public Stepper {
 public:
  AdamStepper(Parameterization param, Objective objective, AdamConfig config);

  std::string name() const override { return "adam"; }
  bool stochastic() const override { return objective_.stochastic(); }
  Probe probe(const OptState& state, std::uint64_t seed) const override;
  StepInfo step(OptState& state, const Probe& probe, std::uint64_t seed) const override;
  Vec target(const OptState& state) const override { return param_.forward(state.theta); }

 private:
  Parameterization param_;
  Objective objective_;
  AdamConfig config_;
};

/// Per-sample scores in optimisation coordinates, for the Monte Carlo
/// Fisher estimate.
struct ScoreModel {
  /// Draws n samples (rows) from the model at target parameters θ.
  std::function<Mat(const Vec& theta, Eigen::Index n, Rng& rng)> sample;
  /// ∇_θ log q_θ(x) for one sample.
  std::function<Vec(const Vec& theta, const Vec& x)> score;

  static ScoreModel for_target(const targets::TargetDescriptor& target);
};

struct NgdExactConfig {
  Eigen::Index samples = 10000;
  /// Ridge τ = ridge_scale × trace(F̂)/dim.
  double ridge_scale = 1e-8;
  Eigen::Index max_dim = 50;
};

/// F̂⁻¹ g with F̂ the average outer product of the score rows plus a ridge.
Vec fisher_solve(const Mat& scores, const Vec& gradient, double ridge_scale = 1e-8);

/// NGD with a Monte Carlo Fisher in the coordinates of `param`.
class NgdExactStepper final : public Stepper {
 public:
  NgdExactStepper(Parameterization param, ScoreModel model, Objective objective, StepSchedule schedule,
                  NgdExactConfig config = {});

  std::string name() const override { return "ngd_exact"; }
  bool stochastic() const override { return objective_.stochastic(); }
  Probe probe(const OptState& state, std::uint64_t seed) const override;
  StepInfo step(OptState& state, const Probe& probe, std::uint64_t seed) const override;
  Vec target(const OptState& state) const override { return param_.forward(state.theta); }

  /// Scores of `count` fresh samples at u, pulled back to u coordinates.
  Mat scores(const Vec& u, Eigen::Index count, std::uint64_t seed) const;

 private:
  Parameterization param_;
  ScoreModel model_;
  Objective objective_;
  StepSchedule schedule_;
  NgdExactConfig config_;
};

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

struct StoppingRules {
  int max_iters = 10000;
  double grad_norm_tol = 1e-8;
  /// Ignored for stochastic objectives.
  double rel_obj_tol = 1e-12;
};

enum class TerminalStatus { kGradNorm, kRelObj, kMaxIters, kStalled };

std::string to_string(TerminalStatus status);

struct TraceRow {
  int iteration = 0;
  double wall_ms = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;
  int backtracks = 0;
};

struct OptTrace {
  std::vector<TraceRow> rows;
  TerminalStatus status = TerminalStatus::kMaxIters;
};

struct RunResult {
  OptTrace trace;
  OptState state;
};

/// A stepper failure, carrying the trace recorded so far.
class RunFailure : public Error {
 public:
  RunFailure(const std::string& what, OptTrace trace) : Error(what), trace_(std::move(trace)) {}
  const OptTrace& trace() const noexcept { return trace_; }

 private:
  OptTrace trace_;
};

/// Steps until a stopping rule fires. Row 0 is the initial evaluation.
/// Iteration t is probed with seed derive_seed(seed, t).
RunResult run(const Stepper& stepper, OptState initial, const StoppingRules& stopping, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckReport {
  double max_rel_error = 0.0;
  Eigen::Index worst = -1;
  bool passed = true;
};

/// Central differences per coordinate; the relative error of coordinate i
/// is |g_i - fd_i| / max(1, |fd_i|).
GradCheckReport grad_check(const std::function<double(const Vec&)>& f, const Vec& gradient, const Vec& theta,
                           double step = 1e-5, double tolerance = 1e-4);

/// The same along explicit directions (columns), for constrained domains.
GradCheckReport grad_check_directions(const std::function<double(const Vec&)>& f, const Vec& gradient,
                                      const Vec& theta, const Mat& directions, double step = 1e-5,
                                      double tolerance = 1e-4);

}  // namespace sngd::optim

#endif  // SNGD_OPTIM_HPP
