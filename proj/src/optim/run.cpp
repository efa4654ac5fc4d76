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

#include <chrono>
#include <cmath>

#include "sngd/optim.hpp"

namespace sngd::optim {

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::kGradNorm: return "grad_norm";
    case TerminalStatus::kRelObj: return "rel_obj";
    case TerminalStatus::kMaxIters: return "max_iters";
    case TerminalStatus::kStalled: return "stalled";
  }
  return "unknown";
}

RunResult run(const Stepper& stepper, OptState initial, const StoppingRules& stopping, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  RunResult out{OptTrace{}, std::move(initial)};
  auto& trace = out.trace;
  Probe probe;
  try {
    probe = stepper.probe(out.state, derive_seed(seed, 0));
  } catch (const Error& e) {
    throw RunFailure(e.what(), trace);
  }
  trace.rows.push_back({0, elapsed_ms(), probe.objective, probe.grad_norm, 0.0, 0});
  if (probe.grad_norm <= stopping.grad_norm_tol) {
    trace.status = TerminalStatus::kGradNorm;
    return out;
  }
  trace.status = TerminalStatus::kMaxIters;
  for (int t = 1; t <= stopping.max_iters; ++t) {
    StepInfo info;
    const double previous = probe.objective;
    try {
      info = stepper.step(out.state, probe, derive_seed(seed, t - 1));
      if (info.stalled) {
        trace.status = TerminalStatus::kStalled;
        break;
      }
      probe = stepper.probe(out.state, derive_seed(seed, t));
    } catch (const Error& e) {
      throw RunFailure(e.what(), trace);
    }
    trace.rows.push_back({t, elapsed_ms(), probe.objective, probe.grad_norm, info.step_size, info.backtracks});
    if (probe.grad_norm <= stopping.grad_norm_tol) {
      trace.status = TerminalStatus::kGradNorm;
      break;
    }
    if (!stepper.stochastic() && std::fabs(probe.objective - previous) <= stopping.rel_obj_tol * std::fabs(previous)) {
      trace.status = TerminalStatus::kRelObj;
      break;
    }
  }
  return out;
}

}  // namespace sngd::optim
