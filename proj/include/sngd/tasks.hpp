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

#ifndef SNGD_TASKS_HPP
#define SNGD_TASKS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sngd/optim.hpp"

namespace sngd::tasks {

using maps::MapDescriptor;
using targets::LogRegModel;
using targets::TargetDescriptor;

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Observations as matrix rows. Count data keeps real storage and sets
/// `counts`, in which case every entry is a nonnegative integer.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DomainError for non-finite entries or, with `counts`, entries
  /// that are not nonnegative integers.
  Dataset(Mat values, bool counts);

  const Mat& values() const noexcept { return values_; }
  bool counts() const noexcept { return counts_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

 private:
  Mat values_;
  bool counts_ = false;
};

/// Distinct rows with multiplicities, in first-seen order.
struct WeightedRows {
  Mat rows;
  Vec weights;
};

WeightedRows compress(const Dataset& data);

struct CsvOptions {
  bool header = false;
  bool counts = false;
};

/// Comma-separated decimal values, one observation per line. Throws
/// ParseError carrying the 1-based line number, and DomainError for an
/// integrality violation.
Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_dataset(std::istream& in, const CsvOptions& options = {});
/// Writes 17 significant digits so that reloading is exact.
void write_dataset(const Dataset& data, const std::filesystem::path& path);
void write_dataset(const Dataset& data, std::ostream& out);

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// f(θ) = -Σᵢ log q_θ(xᵢ). Repeated count rows are evaluated once. Throws
/// DomainError when the data cannot come from the target (wrong dimension,
/// non-count data for a count target, copula data outside (0, 1)).
optim::Objective build_mle_objective(const TargetDescriptor& target, const Dataset& data);

/// Monte Carlo negative ELBO for a normal posterior over logistic-regression
/// weights, on the flat normal(d) layout (m, Σ):
///
///   f(m, Σ) ≈ (1/S) Σₛ [log q(xₛ) - log p(D, xₛ)],   xₛ = m + L εₛ,  Σ = L Lᵀ.
///
/// The gradient is the reparameterised pathwise estimate. Each evaluation
/// draws its S samples from the evaluation seed, so repeated calls with one
/// seed agree exactly. Throws NotPositiveDefinite for an invalid Σ.
optim::Objective build_vi_objective(const LogRegModel& model, Eigen::Index sample_count);

/// Average t over the rows of `x`; for mixtures `z` holds each row's
/// component (0-based) and t is the complete-data statistic.
Vec mean_statistic(const expfam::FamilyDescriptor& family, const Mat& x, const std::vector<int>& z = {});

/// Average negative log-likelihood of an exponential family with sufficient
/// statistic average `t_bar`, A(η(s)) - η(s)·t̄, on standard parameters s.
/// Its minimiser is the moment-matched μ = t̄.
optim::Objective ef_mle_objective(const expfam::FamilyDescriptor& family, const Vec& t_bar);

/// KL(q_η(s) ‖ q_η*) on standard parameters s.
optim::Objective ef_kl_objective(const expfam::NaturalParams& eta_star);

// ---------------------------------------------------------------------------
// Synthetic data and initial values
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  TargetDescriptor target = TargetDescriptor::negbin();
  Vec params;
  Eigen::Index n = 0;
};

struct SyntheticData {
  Dataset data;
  TargetDescriptor target = TargetDescriptor::negbin();
  Vec true_params;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Skew-normal generating parameters: standard-normal ξ and slant,
/// Ω = d⁻¹WᵀW + 10⁻⁴I with standard-normal W.
Vec skew_normal_protocol_params(int dim, Rng& rng);

/// Logistic-regression data: balanced ±1 labels with Gaussian features
/// centred at ±separation·(1, .., 1)/√d.
LogRegModel synthetic_logreg(Eigen::Index n, int dim, double regularization, std::uint64_t seed,
                             double separation = 0.5);

/// Random initial target parameters:
///
///   negbin            s ~ U(0.05, 0.95), r ~ Gamma(shape 6.25, rate 1.25)
///   negbin mixture    equal weights; component means U(0.1, 0.9)·max(x),
///                     overdispersion ratios var/mean = 1/U(0.001, 0.02)
///   skew-normal       ξ, slant ~ N(0, 0.01²I), Ω = I
///   copulas           R = corr(I + WᵀW) with W ~ N(0, 0.01²), ν = 30
///   normal            m ~ N(0, 0.01²I), Σ = I
///
/// `data` is only consulted by the mixtures (skew-normal mixture components
/// are centred on random data rows so that they can separate).
Vec initial_params(const TargetDescriptor& target, Rng& rng, const Dataset* data = nullptr);

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

/// Raw configuration entries keyed by "section.key", in file order of
/// first appearance. Values are kept verbatim; a comma-separated value is a
/// grid over its items.
class RawConfig {
 public:
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const std::vector<std::string>& keys() const noexcept { return order_; }

  /// Applies "section.key=value".
  void apply_override(const std::string& assignment);
  /// The same line-oriented format the parser reads.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

/// [section] headers and key = value lines; '#' and ';' start comments.
/// Throws ParseError with the line number.
RawConfig parse_config(std::istream& in);
RawConfig load_config(const std::filesystem::path& path);

/// The cross product over every grid-valued entry (one cell when there are
/// none). Cells are ordered with the first grid key varying slowest.
std::vector<RawConfig> expand_grid(const RawConfig& raw);

enum class TaskKind { kMle, kVi };
enum class OptimizerKind { kSngd, kGd, kAdam, kNgdExact };

std::string to_string(TaskKind kind);
std::string to_string(OptimizerKind kind);

struct DataSpec {
  enum class Source { kSynthetic, kCsv };
  Source source = Source::kSynthetic;
  std::filesystem::path path;
  bool header = false;
  Eigen::Index n = 1000;
  /// Generating parameters; empty selects the target's default (for
  /// skew-normal targets, a fresh draw of the protocol parameters).
  Vec true_params;
};

struct ViSpec {
  Eigen::Index n = 60;
  double regularization = 1.0;
  double separation = 0.5;
  Eigen::Index mc_samples = 200;
  Eigen::Index eval_samples = 1000;
};

/// One fully resolved grid cell.
struct ExperimentConfig {
  std::string name = "experiment";
  TaskKind task = TaskKind::kMle;
  std::string map_id = "negbin";
  int dim = 1;
  int components = 1;
  expfam::Coordinates coords = expfam::Coordinates::kMean;
  OptimizerKind optimizer = OptimizerKind::kSngd;
  optim::StepSchedule schedule = optim::StepSchedule::exact();
  optim::AuxRule aux_rule;
  optim::AdamConfig adam;
  optim::NgdExactConfig ngd;
  /// Explicit initial target parameters; empty draws them at random.
  Vec init;
  std::uint64_t seed = 0;
  int repeats = 1;
  DataSpec data;
  ViSpec vi;
  optim::StoppingRules stopping;
  std::filesystem::path output_dir = "out";
  /// Wall-clock timings make traces irreproducible, so they are opt-in.
  bool record_wall_clock = false;

  MapDescriptor map() const;
};

/// Resolves one cell. Throws ConfigError naming the offending key, and for
/// unknown map identifiers naming the identifier.
ExperimentConfig resolve(const RawConfig& cell);

struct RunDescriptor {
  std::string run_id;
  int cell = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  RawConfig raw;
  ExperimentConfig config;
};

/// Expands the grid and the replicates. Replicate r of every cell shares
/// the seed derive_seed(base, r), so cells see the same data and starts.
std::vector<RunDescriptor> plan_runs(const RawConfig& raw);

struct RunOutcome {
  RunDescriptor descriptor;
  optim::OptTrace trace;
  std::string status;
  Vec final_target;
  Vec true_params;
  /// Set when the run failed; the trace holds the rows recorded before.
  std::optional<std::string> error;
  /// Negative ELBO with the evaluation sample count (VI runs only).
  std::optional<double> final_eval_objective;
};

/// Deterministic given the descriptor. Optimizer errors are captured in the
/// outcome; configuration and data errors propagate.
RunOutcome execute_run(const RunDescriptor& run);

/// Mean over iterations of the worst (largest) objective across seeds;
/// shorter traces hold their last value.
double average_worst_case(const std::vector<optim::OptTrace>& seeds);

/// Index of the cell whose average_worst_case is smallest.
std::size_t select_best(const std::vector<std::vector<optim::OptTrace>>& cells);

}  // namespace sngd::tasks

#endif  // SNGD_TASKS_HPP
