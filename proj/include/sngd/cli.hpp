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


#ifndef SNGD_CLI_HPP
#define SNGD_CLI_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sngd/tasks.hpp"

namespace sngd::cli {

// ---------------------------------------------------------------------------
// Trace CSVs and manifests
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceHeader = "run_id,iteration,wall_ms,objective,grad_norm,step_size,backtracks";

/// Header plus one row per trace row, floats with 17 significant digits.
void emit_trace_csv(const std::string& run_id, const optim::OptTrace& trace, std::ostream& out);
void emit_trace_csv(const std::string& run_id, const optim::OptTrace& trace, const std::filesystem::path& path);

struct TraceCsv {
  std::vector<std::string> run_ids;
  optim::OptTrace trace;
};

/// Reads a file written by emit_trace_csv. Throws ParseError on a bad header
/// or row.
TraceCsv read_trace_csv(std::istream& in);

/// key = value lines in the configuration format: a [run.<id>] section per
/// outcome with its seed, status, CSV name, error and fully expanded config.
void write_manifest(const std::vector<tasks::RunOutcome>& outcomes, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Gradient suite
// ---------------------------------------------------------------------------

enum class GradScope { kTargets, kMaps, kChain, kAll };

GradScope parse_scope(const std::string& name);

struct GradSuiteOptions {
  int points = 10;
  std::uint64_t seed = 20260101;
  double tolerance = 1e-4;
  /// Test fixture: flips the sign of the negbin log-likelihood gradient.
  bool flip_negbin_gradient = false;
};

struct GradItem {
  std::string scope;
  std::string name;
  double worst_rel_error = 0.0;
  bool passed = true;
};

/// Central-difference checks of every analytic gradient in scope at seeded
/// points: target log-likelihoods in their free coordinates, map pullbacks,
/// and the full chain f(g(θ̃, λ)) in both surrogate coordinates.
std::vector<GradItem> gradient_suite(GradScope scope, const GradSuiteOptions& options = {});

// ---------------------------------------------------------------------------
// Acceptance
// ---------------------------------------------------------------------------

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

/// Runs the listed criteria (all when empty), reporting each as it finishes.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {},
                                            const std::function<void(const CriterionResult&)>& report = {});

std::string format_result(const CriterionResult& result);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// The sngd command line: run, gradcheck, selfcheck, version.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sngd::cli

#endif  // SNGD_CLI_HPP
