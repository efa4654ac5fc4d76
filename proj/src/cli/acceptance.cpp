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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cli/random_points.hpp"
#include "sngd/cli.hpp"

namespace sngd::cli {
namespace {

using namespace detail;
using expfam::Coordinates;
using expfam::MeanParams;
using expfam::NaturalParams;
using expfam::StandardParams;
using maps::MapDescriptor;
using optim::OptState;
using targets::TargetDescriptor;

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

CriterionResult titled(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

double rel(const Vec& got, const Vec& want) { return (got - want).norm() / std::max(1.0, want.norm()); }

std::vector<FamilyDescriptor> families(int mixture_normal_components) {
  return {FamilyDescriptor::gamma(),
          FamilyDescriptor::normal(1),
          FamilyDescriptor::normal(3),
          FamilyDescriptor::zero_mean_normal(2),
          FamilyDescriptor::mixture(3, FamilyDescriptor::gamma()),
          FamilyDescriptor::mixture(mixture_normal_components, FamilyDescriptor::normal(2)),
          FamilyDescriptor::mixture(2, FamilyDescriptor::zero_mean_normal(2))};
}

// One step from the probe at `state`.
void one_step(const optim::SngdStepper& s, OptState& state) {
  const auto probe = s.probe(state, 0);
  s.step(state, probe, 0);
}

// ---------------------------------------------------------------------------
// 1. The SNGD direction is the Fisher-preconditioned gradient.
// ---------------------------------------------------------------------------

// Exact EF scores t(x) - μ, carried to standard coordinates.
optim::ScoreModel ef_scores(const FamilyDescriptor& f) {
  optim::ScoreModel m;
  m.sample = [f](const Vec& s, Index n, Rng& rng) { return expfam::sample(StandardParams(f, s), n, rng); };
  m.score = [f](const Vec& s, const Vec& x) {
    const StandardParams sp(f, s);
    const Vec centred = expfam::sufficient_statistics(f, x) - expfam::mean_from_standard(sp).values();
    return expfam::natural_from_standard_pullback(sp, centred);
  };
  return m;
}

optim::Parameterization ef_coordinates(const FamilyDescriptor& f, Coordinates coords) {
  optim::Parameterization p;
  if (coords == Coordinates::kMean) {
    p.forward = [f](const Vec& u) { return expfam::to_standard(MeanParams(f, u)).values(); };
    p.pullback = [f](const Vec& u, const Vec& c) { return expfam::to_standard_pullback(MeanParams(f, u), c); };
  } else {
    p.forward = [f](const Vec& u) { return expfam::to_standard(NaturalParams(f, u)).values(); };
    p.pullback = [f](const Vec& u, const Vec& c) { return expfam::to_standard_pullback(NaturalParams(f, u), c); };
  }
  return p;
}

// The MLE objective for statistics averaged under a nearby distribution.
optim::Objective shifted_mle(const FamilyDescriptor& f, const Vec& other) {
  return tasks::ef_mle_objective(f, expfam::mean_from_standard(StandardParams(f, other)).values());
}

Vec sngd_direction(const FamilyDescriptor& f, Coordinates coords, const optim::Objective& objective, const Vec& at) {
  const optim::SngdStepper s(MapDescriptor::identity(f), coords, objective, optim::StepSchedule::constant(1.0));
  return s.probe(s.initial_state(at), 0).direction;
}

CriterionResult dual_gradient_identity() {
  auto r = titled(1, "dual-gradient identity");
  Rng rng(101);
  struct Case {
    FamilyDescriptor family;
    Vec at;
    Vec other;
  };
  std::vector<Case> cases = {{FamilyDescriptor::gamma(), Vec{{2.0, 1.0}}, Vec{{2.6, 1.5}}}};
  {
    // Relative agreement per coordinate is only meaningful when no
    // coordinate of the exact direction is close to zero, so seeded draws
    // are taken until every coordinate is at least a tenth of the largest.
    // The screen uses the exact directions only, never the Monte Carlo ones.
    const auto f = FamilyDescriptor::normal(3);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec at = random_standard_block(f, rng);
      Vec other = at;
      other.head(3) += 0.5 * standard_normal_vector(3, rng);
      other.tail(9) = flat(random_spd(3, rng, 0.5));
      const auto objective = shifted_mle(f, other);
      bool balanced = true;
      for (auto coords : {Coordinates::kMean, Coordinates::kNatural}) {
        const Vec d = sngd_direction(f, coords, objective, at).cwiseAbs();
        balanced = balanced && d.minCoeff() >= 0.1 * d.maxCoeff();
      }
      if (balanced) {
        cases.push_back({f, at, other});
        break;
      }
    }
    if (cases.size() != 2) throw ConvergenceError("no balanced normal(3) evaluation point found");
  }
  // Worst per-coordinate relative difference for one coordinate system.
  auto compare = [&](Coordinates coords, Index samples) {
    double worst = 0.0;
    for (const auto& c : cases) {
      const auto objective = shifted_mle(c.family, c.other);
      const Vec direction = sngd_direction(c.family, coords, objective, c.at);
      optim::NgdExactConfig config;
      config.samples = samples;
      const optim::NgdExactStepper ngd(ef_coordinates(c.family, coords), ef_scores(c.family), objective,
                                       optim::StepSchedule::constant(1.0), config);
      OptState state;
      state.theta = coords == Coordinates::kMean
                        ? expfam::mean_from_standard(StandardParams(c.family, c.at)).values()
                        : expfam::natural_from_standard(StandardParams(c.family, c.at)).values();
      const Vec reference = ngd.probe(state, 7).direction;
      worst = std::max(worst, ((direction - reference).array() / reference.array()).abs().maxCoeff());
    }
    return worst;
  };
  // Mean coordinates are the SNGD default for MLE. In natural coordinates
  // the Monte Carlo Fisher is Cov(t), whose fourth-moment noise at 10⁵
  // samples is itself about 5%, so that check is gated at 5·10⁵ samples.
  const double mean_err = compare(Coordinates::kMean, 100000);
  const double natural_small = compare(Coordinates::kNatural, 100000);
  const double natural_err = compare(Coordinates::kNatural, 500000);
  r.passed = mean_err <= 0.05 && natural_err <= 0.05;
  r.detail = fmt("worst per-coordinate relative difference, gamma and normal(3): mean coordinates %.3g (10^5 "
                 "samples); natural coordinates %.3g (5x10^5 samples; %.3g at 10^5, not gated); limit 0.05",
                 mean_err, natural_err, natural_small);
  return r;
}

// ---------------------------------------------------------------------------
// 2, 3. Single-step convergence.
// ---------------------------------------------------------------------------

CriterionResult single_step_mle() {
  auto r = titled(2, "single-step MLE");
  Rng rng(102);
  double worst = 0.0;
  for (const auto& f : families(2)) {
    const auto truth = random_standard(f, rng);
    const auto d = draw(f, truth, 500, rng);
    const Vec t_bar = tasks::mean_statistic(f, d.x, d.z);
    const optim::SngdStepper s(MapDescriptor::identity(f), Coordinates::kMean, tasks::ef_mle_objective(f, t_bar),
                               optim::StepSchedule::constant(1.0));
    auto state = s.initial_state(random_standard(f, rng).values());
    one_step(s, state);
    worst = std::max(worst, rel(state.theta, t_bar));
  }
  r.passed = worst <= 1e-8;
  r.detail = fmt("worst relative distance to the averaged statistics %.3g over 7 families (limit 1e-8)", worst);
  return r;
}

CriterionResult single_step_kl() {
  auto r = titled(3, "single-step KL");
  Rng rng(103);
  double worst = 0.0;
  for (const auto& f : {FamilyDescriptor::gamma(), FamilyDescriptor::normal(2)}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto eta_star = expfam::natural_from_standard(random_standard(f, rng));
      const optim::SngdStepper s(MapDescriptor::identity(f), Coordinates::kNatural, tasks::ef_kl_objective(eta_star),
                                 optim::StepSchedule::constant(1.0));
      auto state = s.initial_state(random_standard(f, rng).values());
      one_step(s, state);
      worst = std::max(worst, rel(state.theta, eta_star.values()));
    }
  }
  r.passed = worst <= 1e-8;
  r.detail = fmt("worst relative distance to η* %.3g for gamma and normal(2) (limit 1e-8)", worst);
  return r;
}

// ---------------------------------------------------------------------------
// 4, 5. Conversions and the log partition.
// ---------------------------------------------------------------------------

CriterionResult round_trips() {
  auto r = titled(4, "round trips");
  Rng rng(104);
  double worst = 0.0;
  for (const auto& f : families(3)) {
    for (int i = 0; i < 100; ++i) {
      const auto eta = expfam::natural_from_standard(random_standard(f, rng));
      worst = std::max(worst, rel(expfam::to_natural(expfam::to_mean(eta)).values(), eta.values()));
      const auto mu = expfam::to_mean(eta);
      worst = std::max(worst, rel(expfam::to_mean(expfam::to_natural(mu)).values(), mu.values()));
    }
  }
  r.passed = worst <= 1e-9;
  r.detail = fmt("worst relative round-trip error %.3g over 7 families x 100 points (limit 1e-9)", worst);
  return r;
}

CriterionResult log_partition_checks() {
  auto r = titled(5, "log-partition gradient and Fisher symmetry");
  Rng rng(105);
  double worst_grad = 0.0, worst_sym = 0.0;
  const double h = 1e-5;
  for (const auto& f : families(3)) {
    for (int i = 0; i < 20; ++i) {
      const auto eta = expfam::natural_from_standard(random_standard(f, rng));
      const Vec mu = expfam::to_mean(eta).values();
      const Vec v = tangent(f, rng, false), u = tangent(f, rng, false);
      const double fd = (expfam::log_partition(NaturalParams(f, eta.values() + h * v)) -
                         expfam::log_partition(NaturalParams(f, eta.values() - h * v))) /
                        (2.0 * h);
      worst_grad = std::max(worst_grad, std::fabs(fd - mu.dot(v)) / std::max(1.0, std::fabs(fd)));
      // ∇²A acting on a cotangent is the pullback through η ↦ μ.
      const double uv = u.dot(expfam::pullback_to_mean(eta, v)), vu = v.dot(expfam::pullback_to_mean(eta, u));
      worst_sym = std::max(worst_sym, std::fabs(uv - vu) / std::max(1.0, std::fabs(uv)));
    }
  }
  r.passed = worst_grad <= 1e-5 && worst_sym <= 1e-9;
  r.detail = fmt("worst ∇A vs μ %.3g (limit 1e-5), worst ∇²A asymmetry %.3g (limit 1e-9)", worst_grad, worst_sym);
  return r;
}

// ---------------------------------------------------------------------------
// 6. Gradient suite.
// ---------------------------------------------------------------------------

CriterionResult gradients() {
  auto r = titled(6, "gradient suite");
  const auto items = gradient_suite(GradScope::kAll);
  double worst = 0.0;
  std::string failing;
  for (const auto& item : items) {
    worst = std::max(worst, item.worst_rel_error);
    if (!item.passed) failing += " " + item.scope + ":" + item.name;
  }
  r.passed = failing.empty();
  r.detail = fmt("%.0f items, worst relative error %.3g (limit 1e-4)", static_cast<double>(items.size()), worst);
  if (!failing.empty()) r.detail += "; failing:" + failing;
  return r;
}

// ---------------------------------------------------------------------------
// 7, 8, 11. Desk experiments and recovery.
// ---------------------------------------------------------------------------

// Gradient-norm tolerance for summed NLL objectives: 2e-7 per observation.
// Value-only line searches cannot resolve much less at these sizes.
double scaled_tolerance(Index n) { return 2e-7 * static_cast<double>(n); }

// The target gradient pulled back through the map at a finished SNGD run.
double pulled_back_norm(const optim::SngdStepper& s, const optim::Objective& objective, const OptState& state) {
  const auto point = maps::chain_forward(s.map(), s.coords(), state.theta, state.aux);
  auto g = maps::chain_pullback(s.map(), point, objective.evaluate(point.target).gradient);
  const auto& family = s.map().surrogate();
  if (family.kind() == expfam::FamilyKind::kMixture) {
    // Weights live on the simplex: keep the tangent part of their gradient.
    auto w = g.standard.head(family.components());
    w.array() -= w.mean();
  }
  return std::sqrt(g.standard.squaredNorm() + g.aux.squaredNorm());
}

struct ConvergenceRecord {
  std::string run;
  double norm = 0.0;
  double tolerance = 0.0;
  bool converged = true;
};

// Collected by criteria 7 and 8 for criterion 11.
std::vector<ConvergenceRecord>& convergence_records() {
  static std::vector<ConvergenceRecord> records;
  return records;
}

int first_within(const optim::OptTrace& trace, double optimum, double tol) {
  for (const auto& row : trace.rows) {
    if (row.objective - optimum <= tol) return row.iteration;
  }
  return -1;
}

CriterionResult negbin_desk() {
  auto r = titled(7, "negbin desk experiment");
  const auto target = TargetDescriptor::negbin();
  const Index n = 5000;
  bool all = true;
  std::string sngd_counts, gd_counts, summed_counts;
  for (int seed = 0; seed < 10; ++seed) {
    const auto gen = tasks::generate_synthetic({target, Vec{{4.0, 0.4}}, n}, derive_seed(seed, 1));
    const auto objective = tasks::build_mle_objective(target, gen.data);
    Rng rng(derive_seed(seed, 2));
    const Vec init = tasks::initial_params(target, rng, &gen.data);

    optim::GdStepper gd(optim::Parameterization::unconstrained(target), objective, optim::StepSchedule::exact());
    OptState gd_start;
    gd_start.theta = targets::free_from_flat(target, init);
    optim::StoppingRules gd_stop;
    gd_stop.max_iters = 100000;
    gd_stop.grad_norm_tol = 0.0;
    gd_stop.rel_obj_tol = 0.0;
    const auto gd_run = optim::run(gd, gd_start, gd_stop, 1);
    const double optimum = gd_run.trace.rows.back().objective;

    optim::SngdStepper sngd(MapDescriptor::negbin(), Coordinates::kMean, objective, optim::StepSchedule::exact());
    optim::StoppingRules stop;
    stop.max_iters = 100;
    stop.grad_norm_tol = scaled_tolerance(n);
    stop.rel_obj_tol = 0.0;
    const auto sngd_run = optim::run(sngd, sngd.initial_state(init), stop, 1);
    if (sngd_run.trace.status == optim::TerminalStatus::kGradNorm) {
      convergence_records().push_back(
          {"negbin seed " + std::to_string(seed), pulled_back_norm(sngd, objective, sngd_run.state), stop.grad_norm_tol});
    }

    // 1e-6 per observation.
    const double tol = 1e-6 * static_cast<double>(n);
    const int k_sngd = first_within(sngd_run.trace, optimum, tol);
    const int k_gd = first_within(gd_run.trace, optimum, tol);
    all = all && k_sngd >= 0 && k_sngd <= 5 && (k_gd < 0 || k_gd > k_sngd);
    sngd_counts += " " + std::to_string(k_sngd);
    gd_counts += " " + std::to_string(k_gd);
    summed_counts += " " + std::to_string(first_within(sngd_run.trace, optimum, 1e-6));
  }
  r.passed = all;
  r.detail = "iterations to within 1e-6 of the GD optimum in average NLL: sngd" + sngd_counts + "; gd" + gd_counts +
             " (summed-NLL scale, for reference: sngd" + summed_counts + ")";
  return r;
}

// An orthonormal-enough basis of the flat layout's tangent space: symmetric
// pairs for matrix blocks, zero-sum moves for mixture weights, and nothing
// for a correlation matrix's unit diagonal.
Mat tangent_basis(const TargetDescriptor& t) {
  std::vector<Vec> cols;
  const Index size = t.flat_size();
  auto unit = [&](Index i) {
    Vec v = Vec::Zero(size);
    v[i] = 1.0;
    return v;
  };
  auto matrix_block = [&](Index offset, int d, bool diagonal) {
    for (int j = 0; j < d; ++j) {
      for (int i = j; i < d; ++i) {
        if (i == j && !diagonal) continue;
        Vec v = Vec::Zero(size);
        v[offset + i + j * d] = 1.0;
        v[offset + j + i * d] = 1.0;
        cols.push_back(v);
      }
    }
  };
  const int d = t.dim(), k = t.components();
  switch (t.kind()) {
    case targets::TargetKind::kNegBin:
      cols = {unit(0), unit(1)};
      break;
    case targets::TargetKind::kNegBinMixture:
      for (int i = 0; i + 1 < k; ++i) cols.push_back(unit(i) - unit(k - 1));
      for (Index i = k; i < size; ++i) cols.push_back(unit(i));
      break;
    case targets::TargetKind::kSkewNormal:
      for (int i = 0; i < d; ++i) cols.push_back(unit(i));
      matrix_block(d, d, true);
      for (int i = 0; i < d; ++i) cols.push_back(unit(d + d * d + i));
      break;
    case targets::TargetKind::kGaussianCopula:
      matrix_block(0, d, false);
      break;
    default:
      throw ConfigError("recovery: no tangent basis for " + t.name());
  }
  Mat b(size, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) b.col(static_cast<Index>(j)) = cols[j];
  return b;
}

// Standard errors from the observed information: the inverse Hessian of the
// NLL on the tangent basis, by central differences of the analytic gradient.
Vec standard_errors(const TargetDescriptor& t, const optim::Objective& objective, const Vec& theta) {
  const Mat b = tangent_basis(t);
  const double h = 1e-5;
  Mat hess(b.cols(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    const Vec gp = objective.evaluate(theta + h * b.col(j)).gradient;
    const Vec gm = objective.evaluate(theta - h * b.col(j)).gradient;
    hess.col(j) = b.transpose() * (gp - gm) / (2.0 * h);
  }
  const Eigen::LDLT<Mat> ldlt(numerics::symmetrize(hess));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
    // Not a local minimum in every tangent direction: no variance proxy.
    return Vec::Constant(theta.size(), std::numeric_limits<double>::quiet_NaN());
  }
  const Mat cov_basis = ldlt.solve(Mat::Identity(b.cols(), b.cols()));
  return (b * cov_basis * b.transpose()).diagonal().cwiseMax(0.0).cwiseSqrt();
}

// Largest |θ̂ - θ| / SE over coordinates with a positive SE; coordinates
// fixed by the layout (SE = 0) must match exactly, and a NaN SE fails.
double worst_z(const Vec& estimate, const Vec& truth, const Vec& se) {
  double worst = 0.0;
  for (Index i = 0; i < estimate.size(); ++i) {
    const double err = std::fabs(estimate[i] - truth[i]);
    if (std::isnan(se[i])) return INFINITY;
    worst = std::max(worst, se[i] > 0.0 ? err / se[i] : (err <= 1e-9 ? 0.0 : INFINITY));
  }
  return worst;
}

// Mixture components relabelled by the permutation that best matches the
// truth.
double worst_z_mixture(const TargetDescriptor& t, const Vec& estimate, const Vec& truth, const Vec& se) {
  const int k = t.components();
  const Index block = (t.flat_size() - k) / k;
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    Vec e(estimate.size()), s(se.size());
    for (int i = 0; i < k; ++i) {
      const int j = perm[static_cast<std::size_t>(i)];
      e[i] = estimate[j];
      s[i] = se[j];
      e.segment(k + i * block, block) = estimate.segment(k + j * block, block);
      s.segment(k + i * block, block) = se.segment(k + j * block, block);
    }
    best = std::min(best, worst_z(e, truth, s));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct RecoveryCase {
  std::string name;
  TargetDescriptor target;
  MapDescriptor map;
  Index n;
  optim::AuxRule aux_rule;
  double line_search_tolerance;
  Coordinates coords = Coordinates::kMean;
  int max_iters = 3000;
};

CriterionResult recovery() {
  auto r = titled(8, "parameter recovery");
  optim::AuxRule adam;
  adam.kind = optim::AuxRule::Kind::kAdam;
  adam.step = 0.1;
  const std::vector<RecoveryCase> cases = {
      {"negbin", TargetDescriptor::negbin(), MapDescriptor::negbin(), 10000, {}, 1e-10},
      {"skew-normal(3)", TargetDescriptor::skew_normal(3), MapDescriptor::skew_normal(3), 20000, adam, 1e-1, Coordinates::kNatural, 1400},
      {"negbin-mixture(3)", TargetDescriptor::negbin_mixture(3), MapDescriptor::negbin_mixture(3), 10000, {}, 1e-4},
      {"gaussian-copula(3)", TargetDescriptor::gaussian_copula(3), MapDescriptor::gaussian_copula(3), 10000, {}, 1e-4},
  };
  const std::uint64_t seed = 8;
  bool all = true;
  for (const auto& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    const auto gen = tasks::generate_synthetic({c.target, Vec(), c.n}, derive_seed(seed, 1));
    const auto objective = tasks::build_mle_objective(c.target, gen.data);
    Rng rng(derive_seed(seed, 2));
    const Vec init = tasks::initial_params(c.target, rng, &gen.data);
    optim::LineSearchConfig ls;
    ls.tolerance = c.line_search_tolerance;
    const optim::SngdStepper s(c.map, c.coords, objective, optim::StepSchedule::exact(ls), c.aux_rule);
    optim::StoppingRules stop;
    stop.max_iters = c.max_iters;
    stop.grad_norm_tol = scaled_tolerance(c.n);
    stop.rel_obj_tol = 0.0;
    const auto result = optim::run(s, s.initial_state(init), stop, 3);
    // A stall means the line search found no representable decrease, which
    // counts as convergence at floating-point resolution.
    const bool converged = result.trace.status == optim::TerminalStatus::kGradNorm ||
                           result.trace.status == optim::TerminalStatus::kStalled;
    convergence_records().push_back(
        {c.name, pulled_back_norm(s, objective, result.state), stop.grad_norm_tol, converged});
    const Vec estimate = s.target(result.state);
    const Vec se = standard_errors(c.target, objective, estimate);
    const double z = c.target.is_mixture() ? worst_z_mixture(c.target, estimate, gen.true_params, se)
                                           : worst_z(estimate, gen.true_params, se);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && z <= 3.0;
    r.detail += (r.detail.empty() ? "" : "; ") + c.name + fmt(" max|err|/SE %.2f, %.0f iterations", z,
                                                               static_cast<double>(result.trace.rows.size() - 1)) +
                fmt(", %.1f s", secs) + (result.trace.status == optim::TerminalStatus::kGradNorm ? "" : " (" + optim::to_string(result.trace.status) + ")");
  }
  r.passed = all;
  return r;
}

// ---------------------------------------------------------------------------
// 9. Domain safety.
// ---------------------------------------------------------------------------

CriterionResult domain_safety() {
  auto r = titled(9, "domain safety");
  const auto target = TargetDescriptor::negbin();
  const auto data = tasks::generate_synthetic({target, Vec{{4.0, 0.4}}, 500}, 909).data;
  const auto objective = tasks::build_mle_objective(target, data);
  Rng rng(109);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0, backtracked = 0, refused = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // Starts crowding the s → 1 boundary with steps of up to 10⁴.
    const double s_start = 1.0 - std::pow(10.0, -1.0 - 3.0 * u(rng));
    const double r_start = std::pow(10.0, -1.0 + 2.0 * u(rng));
    const double eps = std::pow(10.0, 4.0 * u(rng));
    const optim::SngdStepper s(MapDescriptor::negbin(), Coordinates::kMean, objective, optim::StepSchedule::constant(eps));
    auto state = s.initial_state(Vec{{r_start, s_start}});
    try {
      const auto probe = s.probe(state, 0);
      backtracked += s.step(state, probe, 0).backtracks > 0;
    } catch (const DomainError&) {
      ++refused;
    }
    violations += !s.in_domain(state.theta) || !targets::is_valid(target, s.target(state));
  }
  r.passed = violations == 0 && backtracked >= 1;
  r.detail = fmt("%.0f domain violations, %.0f starts backtracked, %.0f steps refused", violations, backtracked, refused);
  return r;
}

// ---------------------------------------------------------------------------
// 10. VI sanity.
// ---------------------------------------------------------------------------

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

CriterionResult vi_sanity() {
  auto r = titled(10, "VI sanity");
  const tasks::ViSpec spec;
  std::vector<double> initial, final;
  double worst_gap = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    const auto model = tasks::synthetic_logreg(60, 2, spec.regularization, derive_seed(seed, 1), spec.separation);
    const auto train = tasks::build_vi_objective(model, spec.mc_samples);
    const auto eval = tasks::build_vi_objective(model, spec.eval_samples);
    const auto map = MapDescriptor::from_id("vi-normal-identity", 2);
    const optim::SngdStepper s(map, Coordinates::kNatural, train, optim::StepSchedule::constant(0.3));
    Rng rng(derive_seed(seed, 2));
    const Vec init = tasks::initial_params(TargetDescriptor::normal(2), rng);
    optim::StoppingRules stop;
    stop.max_iters = 200;
    stop.grad_norm_tol = 0.0;
    const auto result = optim::run(s, s.initial_state(init), stop, derive_seed(seed, 3));
    const std::uint64_t eval_seed = derive_seed(seed, 4);
    initial.push_back(eval.value(init, eval_seed));
    const Vec fitted = s.target(result.state);
    final.push_back(eval.value(fitted, eval_seed));
    worst_gap = std::max(worst_gap, (fitted.head(2) - targets::logreg_map_estimate(model)).cwiseAbs().maxCoeff());
  }
  const double before = median(initial), after = median(final);
  r.passed = after < before && worst_gap <= 0.1;
  r.detail = fmt("median negative ELBO %.4g -> %.4g; worst |mean - MAP| %.3g (limit 0.1)", before, after, worst_gap);
  return r;
}

// ---------------------------------------------------------------------------
// 11. Equivalence at convergence.
// ---------------------------------------------------------------------------

CriterionResult equivalence() {
  auto r = titled(11, "pulled-back gradient at convergence");
  const auto& records = convergence_records();
  double worst_ratio = 0.0;
  std::string worst_run, unconverged;
  int count = 0;
  for (const auto& rec : records) {
    const double ratio = rec.norm / rec.tolerance;
    if (!rec.converged) {
      // Reported for context; the check covers converged runs only.
      unconverged += "; " + rec.run + fmt(" stopped early with ratio %.3g", ratio);
      continue;
    }
    ++count;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst_run = rec.run;
    }
  }
  r.passed = count > 0 && worst_ratio <= 10.0;
  r.detail = fmt("%.0f converged runs, worst pulled-back norm / tolerance %.3g (limit 10)",
                 static_cast<double>(count), worst_ratio) +
             (worst_run.empty() ? "" : " at " + worst_run) + unconverged;
  if (count == 0) r.detail = "no converged runs recorded (criteria 7 and 8 must run first)";
  return r;
}

struct Criterion {
  int id;
  double budget;
  CriterionResult (*fn)();
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, 5, dual_gradient_identity}, {2, 1, single_step_mle}, {3, 1, single_step_kl},  {4, 5, round_trips},
      {5, 5, log_partition_checks},   {6, 30, gradients},      {7, 30, negbin_desk},    {8, 60, recovery},
      {9, 5, domain_safety},          {10, 60, vi_sanity},     {11, 0, equivalence},
  };
  return all;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const std::function<void(const CriterionResult&)>& report) {
  convergence_records().clear();
  std::vector<int> wanted = ids;
  // Criterion 11 inspects the runs of criteria 7 and 8.
  if (std::find(wanted.begin(), wanted.end(), 11) != wanted.end()) {
    for (int dep : {7, 8}) {
      if (std::find(wanted.begin(), wanted.end(), dep) == wanted.end()) wanted.push_back(dep);
    }
  }
  std::vector<CriterionResult> results;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = c.fn();
    } catch (const std::exception& e) {
      result = titled(c.id, "criterion " + std::to_string(c.id));
      result.detail = std::string("error: ") + e.what();
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.budget_seconds = c.budget;
    // Criterion 11 piggybacks on earlier runs and has no budget of its own.
    if (c.budget > 0.0 && result.seconds > c.budget) {
      result.passed = false;
      result.detail += fmt(" [over budget: %.1f s > %.0f s]", result.seconds, c.budget);
    }
    if (report) report(result);
    results.push_back(result);
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s criterion %2d (%.2f s): ", r.passed ? "PASS" : "FAIL", r.id, r.seconds);
  return head + r.title + ": " + r.detail;
}

}  // namespace sngd::cli
