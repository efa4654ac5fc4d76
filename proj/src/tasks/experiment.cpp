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
#include <limits>
#include <memory>

#include "sngd/tasks.hpp"

namespace sngd::tasks {

using Eigen::Index;

namespace {

// Independent streams of one run.
enum Stream : std::uint64_t { kData = 1, kInit = 2, kOptimizer = 3, kEvaluation = 4 };

}  // namespace

RunOutcome execute_run(const RunDescriptor& run) {
  const auto& c = run.config;
  const auto map = c.map();
  if (!map.target()) throw ConfigError("map '" + c.map_id + "' has no modelled target");
  const TargetDescriptor target = *map.target();

  RunOutcome out;
  out.descriptor = run;
  Rng init_rng(derive_seed(run.seed, kInit));
  std::optional<optim::Objective> objective;
  std::optional<LogRegModel> model;
  Vec init = c.init;
  if (c.task == TaskKind::kMle) {
    Dataset data;
    if (c.data.source == DataSpec::Source::kSynthetic) {
      auto gen = generate_synthetic({target, c.data.true_params, c.data.n}, derive_seed(run.seed, kData));
      data = std::move(gen.data);
      out.true_params = std::move(gen.true_params);
    } else {
      data = load_dataset(c.data.path, {c.data.header, target.discrete()});
    }
    objective = build_mle_objective(target, data);
    if (init.size() == 0) init = initial_params(target, init_rng, &data);
  } else {
    model = synthetic_logreg(c.vi.n, c.dim, c.vi.regularization, derive_seed(run.seed, kData), c.vi.separation);
    objective = build_vi_objective(*model, c.vi.mc_samples);
    if (init.size() == 0) init = initial_params(target, init_rng);
  }
  targets::validate(target, init);

  std::unique_ptr<optim::Stepper> stepper;
  optim::OptState state;
  switch (c.optimizer) {
    case OptimizerKind::kSngd: {
      auto s = std::make_unique<optim::SngdStepper>(map, c.coords, *objective, c.schedule, c.aux_rule);
      state = s->initial_state(init);
      stepper = std::move(s);
      break;
    }
    case OptimizerKind::kGd:
      stepper = std::make_unique<optim::GdStepper>(optim::Parameterization::unconstrained(target), *objective, c.schedule);
      state.theta = targets::free_from_flat(target, init);
      break;
    case OptimizerKind::kAdam:
      stepper = std::make_unique<optim::AdamStepper>(optim::Parameterization::unconstrained(target), *objective, c.adam);
      state.theta = targets::free_from_flat(target, init);
      break;
    case OptimizerKind::kNgdExact:
      stepper = std::make_unique<optim::NgdExactStepper>(optim::Parameterization::unconstrained(target),
                                                         optim::ScoreModel::for_target(target), *objective,
                                                         c.schedule, c.ngd);
      state.theta = targets::free_from_flat(target, init);
      break;
  }

  try {
    auto result = optim::run(*stepper, std::move(state), c.stopping, derive_seed(run.seed, kOptimizer));
    out.trace = std::move(result.trace);
    out.status = optim::to_string(out.trace.status);
    out.final_target = stepper->target(result.state);
  } catch (const optim::RunFailure& e) {
    out.trace = e.trace();
    out.status = "failed";
    out.error = e.what();
  }
  if (!c.record_wall_clock) {
    for (auto& row : out.trace.rows) row.wall_ms = 0.0;
  }
  if (model && !out.error) {
    const auto eval = build_vi_objective(*model, c.vi.eval_samples);
    out.final_eval_objective = eval.value(out.final_target, derive_seed(run.seed, kEvaluation));
  }
  return out;
}

double average_worst_case(const std::vector<optim::OptTrace>& seeds) {
  std::size_t length = 0;
  for (const auto& t : seeds) length = std::max(length, t.rows.size());
  if (length == 0) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& t : seeds) {
      if (t.rows.empty()) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, t.rows[std::min(i, t.rows.size() - 1)].objective);
    }
    total += worst;
  }
  return total / static_cast<double>(length);
}

std::size_t select_best(const std::vector<std::vector<optim::OptTrace>>& cells) {
  if (cells.empty()) throw ConfigError("select_best: no cells");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double v = average_worst_case(cells[i]);
    // NaN never wins.
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace sngd::tasks
