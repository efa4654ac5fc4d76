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
#include <algorithm>
#include <numbers>
#include <random>

#include <boost/math/special_functions/digamma.hpp>
#include "doctest.h"

#include "sngd/optim.hpp"
#include "sngd/tasks.hpp"
#include "unit/test_support.hpp"

using namespace sngd;
using namespace sngd::optim;
using sngd::testing::rel_err;

namespace {

using Index = Eigen::Index;
using expfam::Coordinates;
using expfam::FamilyDescriptor;
using expfam::StandardParams;
using maps::MapDescriptor;

Vec flat(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

// Standard parameters for every family variant.
Vec random_standard(const FamilyDescriptor& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (f.kind()) {
    case expfam::FamilyKind::kGamma:
      return Vec{{0.5 + 5.0 * u(rng), 0.2 + 3.0 * u(rng)}};
    case expfam::FamilyKind::kNormal: {
      Vec v(f.standard_size());
      v << sngd::testing::random_vec(f.dim(), rng), flat(sngd::testing::random_spd(f.dim(), rng, 0.5));
      return v;
    }
    case expfam::FamilyKind::kZeroMeanNormal:
      return flat(sngd::testing::random_spd(f.dim(), rng, 0.5));
    case expfam::FamilyKind::kMixture: {
      const int k = f.components();
      Vec w(k);
      for (int i = 0; i < k; ++i) w[i] = 0.5 + u(rng);
      w /= w.sum();
      std::vector<StandardParams> comps;
      for (int i = 0; i < k; ++i) comps.emplace_back(f.component(), random_standard(f.component(), rng));
      return expfam::make_mixture(f.component(), w, comps).values();
    }
  }
  return Vec();
}

// Complete-data samples (z, x) from a family at standard parameters.
struct Draws {
  Mat x;
  std::vector<int> z;
};

Draws draw(const FamilyDescriptor& f, const Vec& standard, Index n, std::mt19937_64& rng) {
  if (f.kind() != expfam::FamilyKind::kMixture) return {expfam::sample(StandardParams(f, standard), n, rng), {}};
  const auto mix = expfam::as_mixture(StandardParams(f, standard));
  std::discrete_distribution<int> pick(mix.weights.data(), mix.weights.data() + mix.weights.size());
  Draws out{Mat(n, f.dim()), {}};
  for (Index i = 0; i < n; ++i) {
    const int z = pick(rng);
    out.z.push_back(z);
    out.x.row(i) = expfam::sample(mix.components[static_cast<std::size_t>(z)], 1, rng).row(0);
  }
  return out;
}

std::vector<FamilyDescriptor> all_families() {
  return {FamilyDescriptor::gamma(),
          FamilyDescriptor::normal(1),
          FamilyDescriptor::normal(3),
          FamilyDescriptor::zero_mean_normal(2),
          FamilyDescriptor::mixture(3, FamilyDescriptor::gamma()),
          FamilyDescriptor::mixture(2, FamilyDescriptor::normal(2)),
          FamilyDescriptor::mixture(2, FamilyDescriptor::zero_mean_normal(2))};
}

// One SNGD step with a constant schedule from the probe at `state`.
StepInfo one_step(const SngdStepper& s, OptState& state) {
  const auto probe = s.probe(state, 0);
  return s.step(state, probe, 0);
}

tasks::Dataset negbin_data(Index n, std::uint64_t seed, double r = 4.0, double s = 0.4) {
  return tasks::generate_synthetic({targets::TargetDescriptor::negbin(), Vec{{r, s}}, n}, seed).data;
}

}  // namespace

// ---------------------------------------------------------------------------
// Line search
// ---------------------------------------------------------------------------

TEST_CASE("line search finds the minimum of a quadratic") {
  const auto r = exact_line_search([](double e) { return (e - 2.0) * (e - 2.0); });
  CHECK(std::fabs(r.step - 2.0) <= 1e-6);
  CHECK(r.value <= 1e-12);
  CHECK(r.evaluations <= LineSearchConfig{}.max_evaluations);
}

TEST_CASE("line search on an increasing function reports no decrease") {
  CHECK_THROWS_AS(exact_line_search([](double e) { return e; }), NoDecrease);
  CHECK_THROWS_AS(exact_line_search([](double e) { return std::exp(e); }), NoDecrease);
}

TEST_CASE("line search clips to the feasible region") {
  auto phi = [](double e) {
    if (e >= 1.0) return std::numeric_limits<double>::infinity();
    return (e - 2.0) * (e - 2.0);
  };
  const auto r = exact_line_search(phi);
  CHECK(r.step < 1.0);
  CHECK(std::fabs(r.step - 1.0) <= 1e-6);
  CHECK(r.infeasible >= 1);

  // Thrown domain errors count as infeasible as well.
  auto throwing = [](double e) -> double {
    if (e >= 0.5) throw DomainError("outside");
    return (e - 2.0) * (e - 2.0);
  };
  CHECK(std::fabs(exact_line_search(throwing).step - 0.5) <= 1e-6);
}

TEST_CASE("line search shrinks an infeasible initial step and expands a small one") {
  LineSearchConfig big;
  big.initial = 1e6;
  CHECK(std::fabs(exact_line_search([](double e) { return (e - 3.0) * (e - 3.0); }, big).step - 3.0) <= 1e-6);
  LineSearchConfig small;
  small.initial = 1e-6;
  CHECK(std::fabs(exact_line_search([](double e) { return (e - 300.0) * (e - 300.0); }, small).step - 300.0) <= 1e-4);
}

// ---------------------------------------------------------------------------
// SNGD steps
// ---------------------------------------------------------------------------

TEST_CASE("one undamped mean step on the gamma MLE objective lands on the moment-matched optimum") {
  std::mt19937_64 rng(11);
  const auto fam = FamilyDescriptor::gamma();
  const auto d = draw(fam, Vec{{2.5, 1.5}}, 500, rng);
  const Vec t_bar = tasks::mean_statistic(fam, d.x);
  const SngdStepper s(MapDescriptor::identity(fam), Coordinates::kMean, tasks::ef_mle_objective(fam, t_bar),
                      StepSchedule::constant(1.0));
  for (int trial = 0; trial < 20; ++trial) {
    auto state = s.initial_state(random_standard(fam, rng));
    const auto info = one_step(s, state);
    CHECK(info.backtracks == 0);
    CHECK(rel_err(state.theta, t_bar) <= 1e-10);
    CHECK(state.iteration == 1);
  }
}

TEST_CASE("single-step MLE convergence holds for every family variant") {
  std::mt19937_64 rng(12);
  for (const auto& fam : all_families()) {
    CAPTURE(fam.name());
    const auto d = draw(fam, random_standard(fam, rng), 400, rng);
    const Vec t_bar = tasks::mean_statistic(fam, d.x, d.z);
    const SngdStepper s(MapDescriptor::identity(fam), Coordinates::kMean, tasks::ef_mle_objective(fam, t_bar),
                        StepSchedule::constant(1.0));
    for (int trial = 0; trial < 5; ++trial) {
      auto state = s.initial_state(random_standard(fam, rng));
      one_step(s, state);
      CHECK(rel_err(state.theta, t_bar) <= 1e-8);
      // The standard parameters are the moment-matched ones as well.
      const Vec want = expfam::to_standard(expfam::MeanParams(fam, t_bar)).values();
      CHECK(rel_err(s.target(state), want) <= 1e-8);
    }
  }
}

TEST_CASE("one undamped natural step on a KL objective returns the reference parameters") {
  std::mt19937_64 rng(13);
  const std::vector<FamilyDescriptor> families{FamilyDescriptor::gamma(), FamilyDescriptor::normal(2),
                                               FamilyDescriptor::zero_mean_normal(3),
                                               FamilyDescriptor::mixture(2, FamilyDescriptor::gamma())};
  for (const auto& fam : families) {
    CAPTURE(fam.name());
    for (int trial = 0; trial < 10; ++trial) {
      const auto eta_star = expfam::natural_from_standard(StandardParams(fam, random_standard(fam, rng)));
      const SngdStepper s(MapDescriptor::identity(fam), Coordinates::kNatural, tasks::ef_kl_objective(eta_star),
                          StepSchedule::constant(1.0));
      auto state = s.initial_state(random_standard(fam, rng));
      one_step(s, state);
      CHECK(rel_err(state.theta, eta_star.values()) <= 1e-8);
    }
  }
}

TEST_CASE("a zero gradient leaves the state unchanged apart from the counter") {
  const auto fam = FamilyDescriptor::gamma();
  const Objective flat_objective([](const Vec& x, std::uint64_t, bool) { return ObjectiveValue{2.0, Vec::Zero(x.size())}; },
                                 false);
  const SngdStepper s(MapDescriptor::identity(fam), Coordinates::kMean, flat_objective, StepSchedule::constant(0.7));
  auto state = s.initial_state(Vec{{3.0, 2.0}});
  const Vec before = state.theta;
  const auto probe = s.probe(state, 0);
  CHECK(probe.grad_norm == 0.0);
  s.step(state, probe, 0);
  CHECK(state.theta == before);
  CHECK(state.iteration == 1);

  // At the moment-matched optimum the gradient vanishes up to rounding.
  const Vec t_bar = expfam::mean_from_standard(StandardParams(fam, Vec{{3.0, 2.0}})).values();
  const SngdStepper mle(MapDescriptor::identity(fam), Coordinates::kMean, tasks::ef_mle_objective(fam, t_bar),
                        StepSchedule::constant(0.7));
  auto at_optimum = mle.initial_state(Vec{{3.0, 2.0}});
  CHECK(mle.probe(at_optimum, 0).grad_norm <= 1e-14);
}

TEST_CASE("a negbin step near the rate boundary backtracks into the domain") {
  const auto data = negbin_data(300, 21);
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), data);
  const SngdStepper s(MapDescriptor::negbin(), Coordinates::kMean, objective, StepSchedule::constant(50.0));
  auto state = s.initial_state(Vec{{0.5, 0.995}});
  const auto info = one_step(s, state);
  CHECK(info.backtracks >= 1);
  CHECK(info.step_size == doctest::Approx(50.0 * std::pow(0.5, info.backtracks)));
  CHECK(s.in_domain(state.theta));
}

TEST_CASE("backtracking keeps adversarial boundary starts in the domain") {
  const auto data = negbin_data(500, 22);
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), data);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0, backtracked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double s_start = 1.0 - std::pow(10.0, -1.0 - 3.0 * u(rng));
    const double r_start = std::pow(10.0, -1.0 + 2.0 * u(rng));
    const double eps = std::pow(10.0, 4.0 * u(rng));
    const SngdStepper s(MapDescriptor::negbin(), Coordinates::kMean, objective, StepSchedule::constant(eps));
    auto state = s.initial_state(Vec{{r_start, s_start}});
    try {
      const auto info = one_step(s, state);
      backtracked += info.backtracks > 0;
    } catch (const DomainError&) {
      // An unrecoverable step must leave the state untouched.
    }
    violations += !s.in_domain(state.theta);
  }
  CHECK(violations == 0);
  CHECK(backtracked >= 1);
}

TEST_CASE("auxiliary parameters with a zero cotangent do not move") {
  // Depends on (ξ, Ω) only.
  const Objective objective(
      [](const Vec& theta, std::uint64_t, bool) {
        const Vec a = Vec::LinSpaced(6, -1.0, 1.0);
        Vec g = Vec::Zero(theta.size());
        g.head(6) = theta.head(6) - a;
        return ObjectiveValue{0.5 * g.squaredNorm(), g};
      },
      false);
  const auto target = targets::flatten(targets::SkewNormalParams{Vec{{0.1, 0.2}}, Mat::Identity(2, 2), Vec{{0.3, -0.4}}});
  for (auto kind : {AuxRule::Kind::kAdam, AuxRule::Kind::kGd}) {
    AuxRule rule;
    rule.kind = kind;
    const SngdStepper s(MapDescriptor::skew_normal(2), Coordinates::kMean, objective, StepSchedule::constant(0.1), rule);
    auto state = s.initial_state(target);
    const Vec aux = state.aux, theta = state.theta;
    one_step(s, state);
    CHECK(state.aux == aux);
    CHECK((state.theta - theta).norm() > 1e-6);
  }
}

TEST_CASE("a zero auxiliary step reduces to the plain SNGD step") {
  std::mt19937_64 rng(31);
  const auto target = targets::TargetDescriptor::skew_normal(2);
  const Vec truth = targets::flatten(targets::SkewNormalParams{Vec{{0.5, -0.5}}, Mat{{1.0, 0.3}, {0.3, 0.8}}, Vec{{2.0, -1.0}}});
  const auto data = tasks::generate_synthetic({target, truth, 300}, 32).data;
  const auto objective = tasks::build_mle_objective(target, data);
  AuxRule rule;
  rule.kind = AuxRule::Kind::kGd;
  rule.step = 0.0;
  const SngdStepper s(MapDescriptor::skew_normal(2), Coordinates::kMean, objective, StepSchedule::constant(1e-3), rule);
  auto state = s.initial_state(tasks::initial_params(target, rng));
  const auto probe = s.probe(state, 0);
  const Vec expected = state.theta - 1e-3 * probe.direction;
  const Vec aux = state.aux;
  s.step(state, probe, 0);
  CHECK(state.theta == expected);
  CHECK(state.aux == aux);
}

TEST_CASE("a small joint step decreases the t-copula objective") {
  const auto target = targets::TargetDescriptor::t_copula(3);
  Mat r{{1.0, 0.5, 0.2}, {0.5, 1.0, 0.4}, {0.2, 0.4, 1.0}};
  const auto data = tasks::generate_synthetic({target, targets::flatten(targets::CopulaParams{r, 6.0}), 400}, 41).data;
  const auto objective = tasks::build_mle_objective(target, data);
  std::mt19937_64 rng(42);
  const Vec start = tasks::initial_params(target, rng);
  for (auto kind : {AuxRule::Kind::kGd, AuxRule::Kind::kAdam}) {
    AuxRule rule;
    rule.kind = kind;
    rule.step = 1e-3;
    const SngdStepper s(MapDescriptor::t_copula(3), Coordinates::kMean, objective, StepSchedule::constant(1e-4), rule);
    auto state = s.initial_state(start);
    const double before = objective.value(s.target(state));
    const auto probe = s.probe(state, 0);
    CHECK(probe.aux_gradient.size() == 1);
    s.step(state, probe, 0);
    CHECK(objective.value(s.target(state)) < before);
  }
}

TEST_CASE("the line-search auxiliary rule moves lambda downhill after the surrogate step") {
  const auto target = targets::TargetDescriptor::t_copula(3);
  Mat r{{1.0, 0.5, 0.2}, {0.5, 1.0, 0.4}, {0.2, 0.4, 1.0}};
  const auto data = tasks::generate_synthetic({target, targets::flatten(targets::CopulaParams{r, 6.0}), 400}, 43).data;
  const auto objective = tasks::build_mle_objective(target, data);
  std::mt19937_64 rng(44);
  AuxRule rule;
  rule.kind = AuxRule::Kind::kLineSearch;
  rule.step = 0.1;
  const SngdStepper s(MapDescriptor::t_copula(3), Coordinates::kMean, objective, StepSchedule::exact(), rule);
  const SngdStepper plain(MapDescriptor::t_copula(3), Coordinates::kMean, objective, StepSchedule::exact(),
                          AuxRule{AuxRule::Kind::kGd, 0.0, {}});
  auto state = s.initial_state(tasks::initial_params(target, rng));
  auto reference = state;
  const double before = objective.value(s.target(state));
  const auto info = s.step(state, s.probe(state, 0), 0);
  plain.step(reference, plain.probe(reference, 0), 0);
  CHECK_FALSE(info.stalled);
  CHECK(state.last_step == info.step_size);
  CHECK(state.last_aux_step > 0.0);
  CHECK(state.aux != reference.aux);
  CHECK(rel_err(state.theta, reference.theta) <= 1e-15);
  const double after = objective.value(s.target(state));
  CHECK(after < objective.value(plain.target(reference)));
  CHECK(after < before);
}

TEST_CASE("the exact line search warm starts from the previous step") {
  const auto data = negbin_data(400, 45);
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), data);
  const SngdStepper s(MapDescriptor::negbin(), Coordinates::kMean, objective, StepSchedule::exact());
  auto state = s.initial_state(Vec{{2.0, 0.6}});
  CHECK(state.last_step == 0.0);
  double previous = INFINITY;
  for (int t = 0; t < 4; ++t) {
    const auto info = s.step(state, s.probe(state, 0), 0);
    CHECK(state.last_step == info.step_size);
    const double f = objective.value(s.target(state));
    CHECK(f <= previous);
    previous = f;
  }
}

TEST_CASE("fused and unfused chains give the same step direction") {
  const auto data = negbin_data(200, 51);
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), data);
  const auto map = MapDescriptor::negbin();
  for (auto coords : {Coordinates::kMean, Coordinates::kNatural}) {
    const SngdStepper s(map, coords, objective, StepSchedule::constant(1.0));
    const auto state = s.initial_state(Vec{{3.0, 0.3}});
    const auto point = maps::chain_forward(map, coords, state.theta, state.aux);
    const Vec g = objective.evaluate(point.target).gradient;
    const auto fused = maps::chain_pullback(map, point, g, maps::ChainPath::kFused);
    const auto unfused = maps::chain_pullback(map, point, g, maps::ChainPath::kUnfused);
    CHECK(rel_err(fused.direction, unfused.direction) <= 1e-12);
    CHECK(rel_err(s.probe(state, 0).direction, fused.direction) <= 1e-15);
  }
}

TEST_CASE("SNGD direction matches the inverse Fisher times the gradient in surrogate coordinates") {
  // Mean-coordinate natural gradient F_μ⁻¹∇_μ f = ∇²A(η)∇_μ f = ∇_η f.
  const auto data = negbin_data(300, 52);
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), data);
  const auto map = MapDescriptor::negbin();
  const SngdStepper s(map, Coordinates::kMean, objective, StepSchedule::constant(1.0));
  const auto state = s.initial_state(Vec{{2.0, 0.6}});
  auto f_of_mu = [&](const Vec& mu) { return objective.value(maps::chain_forward(map, Coordinates::kMean, mu, Vec()).target); };
  const Vec plain = sngd::testing::fd_gradient(f_of_mu, state.theta, 1e-6);
  const auto eta = expfam::to_natural(expfam::MeanParams(map.surrogate(), state.theta));
  const Vec natural_grad = expfam::pullback_to_mean(eta, plain);
  CHECK(rel_err(s.probe(state, 0).direction, natural_grad) <= 1e-5);
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

TEST_CASE("gd reaches the minimum of half the squared norm in one unit step") {
  const Objective objective([](const Vec& x, std::uint64_t, bool) { return ObjectiveValue{0.5 * x.squaredNorm(), x}; },
                            false);
  const GdStepper gd(Parameterization::identity(), objective, StepSchedule::constant(1.0));
  OptState state;
  state.theta = Vec{{3.0, -4.0, 0.5}};
  const auto probe = gd.probe(state, 0);
  CHECK(probe.grad_norm == doctest::Approx(std::sqrt(25.25)));
  gd.step(state, probe, 0);
  CHECK(state.theta.norm() == 0.0);

  // The exact line search finds the same step.
  const GdStepper exact(Parameterization::identity(), objective, StepSchedule::exact());
  state.theta = Vec{{3.0, -4.0, 0.5}};
  const auto info = exact.step(state, exact.probe(state, 0), 0);
  CHECK(info.step_size == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(state.theta.norm() <= 1e-7);
}

TEST_CASE("the first Adam step moves every coordinate by the learning rate") {
  const Vec scale{{1e-6, 1.0, 1e6, -3.0}};
  const Objective objective([&](const Vec& x, std::uint64_t, bool) { return ObjectiveValue{scale.dot(x), scale}; },
                            false);
  AdamConfig config;
  config.learning_rate = 0.05;
  const AdamStepper adam(Parameterization::identity(), objective, config);
  OptState state;
  state.theta = Vec::Zero(4);
  adam.step(state, adam.probe(state, 0), 0);
  for (Index i = 0; i < 4; ++i) {
    const double g = scale[i];
    CHECK(state.theta[i] == doctest::Approx(-0.05 * g / (std::fabs(g) + config.epsilon)).epsilon(1e-9));
  }
  CHECK(std::fabs(std::fabs(state.theta[2]) - 0.05) <= 1e-12);
}

TEST_CASE("ngd_exact on the gamma MLE points along the exact natural gradient") {
  const auto fam = FamilyDescriptor::gamma();
  std::mt19937_64 rng(61);
  const auto d = draw(fam, Vec{{2.0, 1.0}}, 1000, rng);
  const Vec t_bar = tasks::mean_statistic(fam, d.x);
  const auto objective = tasks::ef_mle_objective(fam, t_bar);
  ScoreModel model;
  model.sample = [fam](const Vec& s, Index n, Rng& g) { return expfam::sample(StandardParams(fam, s), n, g); };
  model.score = [](const Vec& s, const Vec& x) {
    return Vec{{std::log(s[1]) - boost::math::digamma(s[0]) + std::log(x[0]), s[0] / s[1] - x[0]}};
  };
  NgdExactConfig config;
  config.samples = 100000;
  const NgdExactStepper ngd(Parameterization::identity(), model, objective, StepSchedule::constant(1.0), config);
  OptState state;
  state.theta = Vec{{3.5, 2.5}};
  const Vec direction = ngd.probe(state, 7).direction;

  // Tangent vector: the mean-coordinate direction μ - t̄ pushed to standard coordinates.
  const Vec mu = expfam::mean_from_standard(StandardParams(fam, state.theta)).values();
  auto standard_of_mean = [&](const Vec& m) { return expfam::to_standard(expfam::MeanParams(fam, m)).values(); };
  const Vec exact = sngd::testing::fd_jacobian(standard_of_mean, mu) * (mu - t_bar);
  const double cosine = direction.dot(exact) / (direction.norm() * exact.norm());
  CHECK(std::acos(std::min(1.0, cosine)) * 180.0 / std::numbers::pi <= 5.0);
}

TEST_CASE("fisher_solve adds a scale-aware ridge and rejects bad input") {
  Mat scores(4, 2);
  scores << 1, 0, -1, 0, 0, 2, 0, -2;
  const Vec d = fisher_solve(scores, Vec{{1.0, 4.0}}, 0.0);
  CHECK(rel_err(d, Vec{{2.0, 2.0}}) <= 1e-14);
  CHECK_THROWS_AS(fisher_solve(Mat::Zero(3, 2), Vec::Ones(2), 0.0), SingularSystem);
  CHECK_THROWS_AS(fisher_solve(scores, Vec::Ones(3)), ShapeError);
}

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

TEST_CASE("max_iters = 0 records only the initial evaluation") {
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), negbin_data(100, 71));
  const SngdStepper s(MapDescriptor::negbin(), Coordinates::kMean, objective, StepSchedule::exact());
  StoppingRules stop;
  stop.max_iters = 0;
  const auto result = run(s, s.initial_state(Vec{{2.0, 0.5}}), stop, 1);
  REQUIRE(result.trace.rows.size() == 1);
  CHECK(result.trace.rows[0].iteration == 0);
  CHECK(result.trace.rows[0].objective == doctest::Approx(objective.value(Vec{{2.0, 0.5}})));
  CHECK(result.trace.status == TerminalStatus::kMaxIters);
}

TEST_CASE("gamma MLE via SNGD stops by gradient norm after one iteration") {
  std::mt19937_64 rng(72);
  const auto fam = FamilyDescriptor::gamma();
  const auto d = draw(fam, Vec{{1.7, 0.4}}, 800, rng);
  const SngdStepper s(MapDescriptor::identity(fam), Coordinates::kMean,
                      tasks::ef_mle_objective(fam, tasks::mean_statistic(fam, d.x)), StepSchedule::constant(1.0));
  const auto result = run(s, s.initial_state(Vec{{4.0, 4.0}}), {}, 3);
  CHECK(result.trace.status == TerminalStatus::kGradNorm);
  REQUIRE(result.trace.rows.size() == 2);
  CHECK(result.trace.rows[1].iteration == 1);
  CHECK(result.trace.rows[1].grad_norm <= 1e-8);
}

TEST_CASE("negbin SNGD with line search has a nonincreasing objective") {
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), negbin_data(2000, 73));
  const SngdStepper s(MapDescriptor::negbin(), Coordinates::kMean, objective, StepSchedule::exact());
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 5; ++trial) {
    const auto start = tasks::initial_params(targets::TargetDescriptor::negbin(), rng);
    StoppingRules stop;
    stop.max_iters = 50;
    const auto result = run(s, s.initial_state(start), stop, 5);
    const auto& rows = result.trace.rows;
    CHECK(rows.size() >= 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].iteration == rows[i - 1].iteration + 1);
      CHECK(rows[i].objective <= rows[i - 1].objective);
      CHECK(rows[i].wall_ms >= rows[i - 1].wall_ms);
    }
    CHECK(result.trace.status != TerminalStatus::kMaxIters);
  }
}

TEST_CASE("a failing stepper surfaces the trace recorded so far") {
  int calls = 0;
  const Objective objective(
      [&](const Vec& x, std::uint64_t, bool) {
        if (++calls > 3) throw DomainError("boom");
        return ObjectiveValue{0.5 * x.squaredNorm(), x};
      },
      false);
  const GdStepper gd(Parameterization::identity(), objective, StepSchedule::constant(0.1));
  OptState state;
  state.theta = Vec::Ones(2);
  try {
    run(gd, state, {}, 0);
    FAIL("expected a RunFailure");
  } catch (const RunFailure& e) {
    CHECK(e.trace().rows.size() == 3);
    CHECK(std::string(e.what()) == "boom");
  }
}

TEST_CASE("stochastic objectives ignore the relative objective rule and get fresh seeds") {
  std::vector<std::uint64_t> seeds;
  const Objective objective(
      [&](const Vec& x, std::uint64_t seed, bool) {
        seeds.push_back(seed);
        return ObjectiveValue{1.0, 1e-3 * x};
      },
      true);
  const GdStepper gd(Parameterization::identity(), objective, StepSchedule::constant(0.1));
  CHECK_THROWS_AS(GdStepper(Parameterization::identity(), objective, StepSchedule::exact()), ConfigError);
  OptState state;
  state.theta = Vec::Ones(2);
  StoppingRules stop;
  stop.max_iters = 5;
  const auto result = run(gd, state, stop, 9);
  CHECK(result.trace.rows.size() == 6);
  CHECK(result.trace.status == TerminalStatus::kMaxIters);
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::unique(seeds.begin(), seeds.end()) == seeds.end());
}

// ---------------------------------------------------------------------------
// Gradient checks
// ---------------------------------------------------------------------------

TEST_CASE("grad_check on a linear function is exact") {
  const Vec a{{1.5, -2.0, 0.25}};
  const auto report = grad_check([&](const Vec& x) { return a.dot(x); }, a, Vec{{0.3, 0.1, -7.0}});
  CHECK(report.passed);
  CHECK(report.max_rel_error <= 1e-10);
}

TEST_CASE("grad_check on the fourth power of the norm") {
  const Vec theta{{1.0, 2.0}};
  auto f = [](const Vec& x) { return std::pow(x.squaredNorm(), 2); };
  const Vec g = 4.0 * theta.squaredNorm() * theta;
  const auto report = grad_check(f, g, theta);
  CHECK(report.passed);
  CHECK(report.max_rel_error <= 1e-6);
  Vec wrong = g;
  wrong[1] += 1.0;
  const auto bad = grad_check(f, wrong, theta);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst == 1);
}

TEST_CASE("the full negbin chain gradient matches finite differences") {
  const auto objective = tasks::build_mle_objective(targets::TargetDescriptor::negbin(), negbin_data(400, 81));
  const auto map = MapDescriptor::negbin();
  std::mt19937_64 rng(82);
  for (auto coords : {Coordinates::kMean, Coordinates::kNatural}) {
    const SngdStepper s(map, coords, objective, StepSchedule::constant(1.0));
    for (int trial = 0; trial < 5; ++trial) {
      const auto state = s.initial_state(tasks::initial_params(targets::TargetDescriptor::negbin(), rng));
      const auto point = maps::chain_forward(map, coords, state.theta, state.aux);
      const auto g = maps::chain_pullback(map, point, objective.evaluate(point.target).gradient);
      auto f = [&](const Vec& t) { return objective.value(maps::chain_forward(map, coords, t, Vec()).target); };
      const double h = 1e-6 * std::max(1.0, state.theta.norm());
      const auto report = grad_check(f, g.plain, state.theta, h);
      CAPTURE(report.max_rel_error);
      CHECK(report.passed);
    }
  }
}

// ---------------------------------------------------------------------------
// Cross-optimizer properties
// ---------------------------------------------------------------------------

TEST_CASE("SNGD, GD and Adam agree on the negbin MLE") {
  const auto target = targets::TargetDescriptor::negbin();
  const auto objective = tasks::build_mle_objective(target, negbin_data(3000, 91));
  std::mt19937_64 rng(92);
  const Vec start = tasks::initial_params(target, rng);

  const SngdStepper sngd_stepper(maps::MapDescriptor::negbin(), Coordinates::kMean, objective, StepSchedule::exact());
  StoppingRules stop;
  stop.max_iters = 500;
  stop.grad_norm_tol = 1e-9;
  stop.rel_obj_tol = 0.0;
  const auto a = run(sngd_stepper, sngd_stepper.initial_state(start), stop, 1);
  const Vec theta_sngd = sngd_stepper.target(a.state);

  const GdStepper gd(Parameterization::unconstrained(target), objective, StepSchedule::exact());
  OptState gd_state;
  gd_state.theta = targets::free_from_flat(target, start);
  stop.max_iters = 20000;
  stop.grad_norm_tol = 1e-7;
  const auto b = run(gd, gd_state, stop, 1);
  const Vec theta_gd = gd.target(b.state);

  AdamConfig adam_config;
  adam_config.learning_rate = 2e-3;
  const AdamStepper adam(Parameterization::unconstrained(target), objective, adam_config);
  OptState adam_state;
  adam_state.theta = targets::free_from_flat(target, start);
  stop.max_iters = 40000;
  stop.grad_norm_tol = 1e-6;
  const auto c = run(adam, adam_state, stop, 1);
  const Vec theta_adam = adam.target(c.state);

  CAPTURE(theta_sngd.transpose());
  CAPTURE(theta_gd.transpose());
  CAPTURE(theta_adam.transpose());
  for (Index i = 0; i < 2; ++i) {
    CHECK(std::fabs(theta_gd[i] - theta_sngd[i]) <= 1e-4 * std::fabs(theta_sngd[i]));
    CHECK(std::fabs(theta_adam[i] - theta_sngd[i]) <= 1e-4 * std::fabs(theta_sngd[i]));
  }
}

TEST_CASE("at SNGD convergence the target gradient pulled back through the map is small") {
  const auto target = targets::TargetDescriptor::negbin();
  const auto objective = tasks::build_mle_objective(target, negbin_data(5000, 93));
  const auto map = maps::MapDescriptor::negbin();
  const SngdStepper s(map, Coordinates::kMean, objective, StepSchedule::exact());
  // The summed objective is about 1e4 here, so value comparisons in the line
  // search cannot resolve gradient norms much below 1e-4.
  StoppingRules stop;
  stop.grad_norm_tol = 1e-3;
  stop.rel_obj_tol = 0.0;
  std::mt19937_64 rng(94);
  for (int trial = 0; trial < 5; ++trial) {
    const auto result = run(s, s.initial_state(tasks::initial_params(target, rng)), stop, 2);
    REQUIRE(result.trace.status == TerminalStatus::kGradNorm);
    const auto point = maps::chain_forward(map, Coordinates::kMean, result.state.theta, result.state.aux);
    const auto g = maps::chain_pullback(map, point, objective.evaluate(point.target).gradient);
    CAPTURE(g.standard.norm());
    CHECK(g.standard.norm() <= 10.0 * stop.grad_norm_tol);
  }
}
