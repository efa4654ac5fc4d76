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

#include "sngd/targets.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "sngd/error.hpp"

namespace sngd::targets {

using numerics::SpdMatrix;
using Index = Eigen::Index;

namespace {

constexpr double kWeightTol = 1e-12;
constexpr double kUnitDiagonalTol = 1e-12;

double log_sigmoid(double t) { return t >= 0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Mat block_matrix(const Vec& flat, Index offset, Index dim) {
  return Eigen::Map<const Mat>(flat.data() + offset, dim, dim);
}

void put_matrix(Vec& flat, Index offset, const Mat& m) {
  flat.segment(offset, m.size()) = Eigen::Map<const Vec>(m.data(), m.size());
}

Vec effective_weights(const Vec& weights, Index rows) {
  if (weights.size() == 0) return Vec::Ones(rows);
  if (weights.size() != rows) throw ShapeError("log_likelihood: weights do not match rows");
  return weights;
}

void validate_weights(const Vec& w) {
  if (!w.allFinite() || (w.array() <= 0.0).any()) throw DomainError("mixture weights must be positive");
  if (std::fabs(w.sum() - 1.0) > kWeightTol) throw DomainError("mixture weights must sum to one");
}

void check_columns(const Mat& x, int dim, const std::string& who) {
  if (x.cols() != dim) throw ShapeError(who + ": observations have the wrong dimension");
}

// Per-row log densities of one component, plus its gradient for arbitrary
// row weights. Mixtures weight rows by responsibilities.
class RowModel {
 public:
  virtual ~RowModel() = default;
  const Vec& log_density() const { return log_density_; }
  virtual Vec weighted_gradient(const Vec& row_weights) const = 0;

 protected:
  Vec log_density_;
};

class NegBinRows final : public RowModel {
 public:
  NegBinRows(const NegBinParams& p, const Vec& counts) : p_(p), counts_(counts) {
    validate(p);
    if ((counts.array() < 0.0).any() || (counts.array() != counts.array().floor()).any()) {
      throw DomainError("negbin: observations must be nonnegative integers");
    }
    const double lr = std::lgamma(p.r), ls = std::log(p.s), l1s = std::log1p(-p.s);
    log_density_.resize(counts.size());
    for (Index i = 0; i < counts.size(); ++i) {
      const double x = counts[i];
      log_density_[i] = std::lgamma(x + p.r) - std::lgamma(x + 1.0) - lr + x * l1s + p.r * ls;
    }
  }

  Vec weighted_gradient(const Vec& w) const override {
    const double dig_r = numerics::digamma(p_.r), ls = std::log(p_.s);
    double dr = 0.0, ds = 0.0;
    for (Index i = 0; i < counts_.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double x = counts_[i];
      dr += w[i] * ((x == 0.0 ? 0.0 : numerics::digamma(x + p_.r) - dig_r) + ls);
      ds += w[i] * (-x / (1.0 - p_.s) + p_.r / p_.s);
    }
    return Vec{{dr, ds}};
  }

 private:
  NegBinParams p_;
  Vec counts_;
};

// Normal rows, optionally skewed by Φ(slant·(x - ξ)).
class GaussianRows final : public RowModel {
 public:
  GaussianRows(const Vec& loc, const Mat& scatter, const Vec* slant, const Mat& x)
      : scatter_(scatter), loc_(loc), skewed_(slant != nullptr) {
    const Index d = loc.size();
    check_columns(x, static_cast<int>(d), "normal");
    resid_ = x.rowwise() - loc.transpose();
    // One small inverse and a product beats a triangular solve with n
    // right-hand sides by an order of magnitude.
    solved_ = scatter_.inverse() * resid_.transpose();
    const double c = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * scatter_.log_det();
    log_density_ = (c - 0.5 * (resid_.transpose().array() * solved_.array()).colwise().sum()).transpose();
    if (skewed_) {
      slant_ = *slant;
      proj_ = resid_ * slant_;
      for (Index i = 0; i < proj_.size(); ++i) {
        log_density_[i] += std::numbers::ln2 + numerics::normal_log_cdf(proj_[i]);
      }
    }
  }

  Vec weighted_gradient(const Vec& w) const override {
    const Index d = loc_.size();
    Vec out(skewed_ ? 2 * d + d * d : d + d * d);
    Vec d_loc = solved_ * w;
    Mat d_scatter = -0.5 * w.sum() * scatter_.inverse() + 0.5 * solved_ * w.asDiagonal() * solved_.transpose();
    if (skewed_) {
      Vec wm(proj_.size());
      for (Index i = 0; i < proj_.size(); ++i) wm[i] = w[i] == 0.0 ? 0.0 : w[i] * numerics::normal_mills_ratio(proj_[i]);
      d_loc -= wm.sum() * slant_;
      out.tail(d) = resid_.transpose() * wm;
    }
    out.head(d) = d_loc;
    put_matrix(out, d, numerics::symmetrize(d_scatter));
    return out;
  }

 private:
  SpdMatrix scatter_;
  Vec loc_;
  bool skewed_;
  Vec slant_;
  Mat resid_;   // n × d
  Mat solved_;  // d × n, Ω⁻¹(x - ξ)
  Vec proj_;
};

std::unique_ptr<RowModel> component_rows(const TargetDescriptor& target, const Vec& block, const Mat& x) {
  const int d = target.dim();
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture:
      check_columns(x, 1, "negbin");
      return std::make_unique<NegBinRows>(as_negbin(block), x.col(0));
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture: {
      const Vec slant = block.tail(d);
      return std::make_unique<GaussianRows>(block.head(d), block_matrix(block, d, d), &slant, x);
    }
    case TargetKind::kNormal:
      return std::make_unique<GaussianRows>(block.head(d), block_matrix(block, d, d), nullptr, x);
    default:
      throw std::logic_error("component_rows: not a row-model target");
  }
}

Evaluation mixture_likelihood(const TargetDescriptor& target, const Vec& theta, const Mat& x,
                              const Vec& w, bool with_grad) {
  const int k = target.components();
  const Index b = target.block_size();
  const Vec pi = theta.head(k);
  validate_weights(pi);
  std::vector<std::unique_ptr<RowModel>> comps;
  Mat joint(x.rows(), k);
  for (int j = 0; j < k; ++j) {
    comps.push_back(component_rows(target, theta.segment(k + j * b, b), x));
    joint.col(j) = comps.back()->log_density().array() + std::log(pi[j]);
  }
  const Vec top = joint.rowwise().maxCoeff();
  const Vec total = top.array() + (joint.colwise() - top).array().exp().rowwise().sum().log();
  Evaluation out;
  out.value = w.dot(total);
  if (!with_grad) return out;
  out.grad.resize(theta.size());
  for (int j = 0; j < k; ++j) {
    const Vec resp_w = w.cwiseProduct((joint.col(j) - total).array().exp().matrix());
    out.grad[j] = resp_w.sum() / pi[j];
    out.grad.segment(k + j * b, b) = comps[j]->weighted_gradient(resp_w);
  }
  return out;
}

Mat gaussian_scores(const Mat& u) {
  Mat z(u.rows(), u.cols());
  for (Index i = 0; i < u.size(); ++i) {
    const double p = u.data()[i];
    if (!(p > 0.0 && p < 1.0)) throw DomainError("copula: observation on or outside the unit-cube boundary");
    z.data()[i] = numerics::normal_quantile(p);
  }
  return z;
}

Mat t_scores(const Mat& u, double nu) {
  Mat z(u.rows(), u.cols());
  for (Index i = 0; i < u.size(); ++i) {
    const double p = u.data()[i];
    if (!(p > 0.0 && p < 1.0)) throw DomainError("copula: observation on or outside the unit-cube boundary");
    z.data()[i] = numerics::student_t_quantile(p, nu);
  }
  return z;
}

Evaluation gaussian_copula_likelihood(const Mat& corr, const Mat& u, const Vec& w, bool with_grad) {
  validate(CopulaParams{corr, std::nullopt});
  check_columns(u, static_cast<int>(corr.rows()), "gaussian copula");
  const SpdMatrix r(corr);
  const Mat z = gaussian_scores(u);
  const Mat b = r.solve(Mat(z.transpose()));
  const Vec quad = (z.transpose().array() * b.array()).colwise().sum().transpose();
  const Vec zz = z.rowwise().squaredNorm();
  Evaluation out;
  out.value = w.dot((-0.5 * r.log_det() - 0.5 * (quad - zz).array()).matrix());
  if (with_grad) {
    const Mat g = -0.5 * w.sum() * r.inverse() + 0.5 * b * w.asDiagonal() * b.transpose();
    out.grad = Eigen::Map<const Vec>(numerics::symmetrize(g).eval().data(), g.size());
  }
  return out;
}

// Value and R-gradient at fixed ν.
Evaluation t_copula_fixed_nu(const SpdMatrix& r, double nu, const Mat& u, const Vec& w, bool with_grad) {
  const Index d = r.dim();
  const Mat z = t_scores(u, nu);
  const Mat b = r.solve(Mat(z.transpose()));
  const Vec quad = (z.transpose().array() * b.array()).colwise().sum().transpose();
  const double c = std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
                   0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * r.log_det();
  Evaluation out;
  for (Index i = 0; i < z.rows(); ++i) {
    double marg = 0.0;
    for (Index j = 0; j < d; ++j) marg += numerics::student_t_log_pdf(z(i, j), nu);
    out.value += w[i] * (c - 0.5 * (nu + d) * std::log1p(quad[i] / nu) - marg);
  }
  if (with_grad) {
    Vec scale(z.rows());
    for (Index i = 0; i < z.rows(); ++i) scale[i] = w[i] * 0.5 * (nu + d) / (nu + quad[i]);
    const Mat g = -0.5 * w.sum() * r.inverse() + b * scale.asDiagonal() * b.transpose();
    out.grad = Eigen::Map<const Vec>(numerics::symmetrize(g).eval().data(), g.size());
  }
  return out;
}

Evaluation t_copula_likelihood(const Vec& theta, int d, const Mat& u, const Vec& w, bool with_grad) {
  const auto p = as_copula(theta, d, true);
  validate(p);
  check_columns(u, d, "t copula");
  const SpdMatrix r(p.corr);
  const double nu = *p.nu;
  Evaluation out = t_copula_fixed_nu(r, nu, u, w, with_grad);
  if (with_grad) {
    const double h = std::min(std::max(1e-4, 1e-4 * nu), 0.5 * (nu - 2.0));
    const double up = t_copula_fixed_nu(r, nu + h, u, w, false).value;
    const double down = t_copula_fixed_nu(r, nu - h, u, w, false).value;
    out.grad.conservativeResize(d * d + 1);
    out.grad[d * d] = (up - down) / (2.0 * h);
  }
  return out;
}

Vec softmax(const Vec& a) {
  const Vec e = (a.array() - a.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

// ---------------------------------------------------------------------------
// Descriptor
// ---------------------------------------------------------------------------

TargetDescriptor::TargetDescriptor(TargetKind kind, int dim, int components)
    : kind_(kind), dim_(dim), components_(components) {
  if (dim < 1) throw DomainError("target dimension must be positive");
  if (components < 1) throw DomainError("mixture needs at least one component");
}

TargetDescriptor TargetDescriptor::negbin() { return {TargetKind::kNegBin, 1, 1}; }
TargetDescriptor TargetDescriptor::negbin_mixture(int k) { return {TargetKind::kNegBinMixture, 1, k}; }
TargetDescriptor TargetDescriptor::skew_normal(int d) { return {TargetKind::kSkewNormal, d, 1}; }
TargetDescriptor TargetDescriptor::skew_normal_mixture(int k, int d) {
  return {TargetKind::kSkewNormalMixture, d, k};
}
TargetDescriptor TargetDescriptor::gaussian_copula(int d) { return {TargetKind::kGaussianCopula, d, 1}; }
TargetDescriptor TargetDescriptor::t_copula(int d) { return {TargetKind::kTCopula, d, 1}; }
TargetDescriptor TargetDescriptor::normal(int d) { return {TargetKind::kNormal, d, 1}; }

bool TargetDescriptor::is_mixture() const noexcept {
  return kind_ == TargetKind::kNegBinMixture || kind_ == TargetKind::kSkewNormalMixture;
}

bool TargetDescriptor::discrete() const noexcept {
  return kind_ == TargetKind::kNegBin || kind_ == TargetKind::kNegBinMixture;
}

Index TargetDescriptor::block_size() const {
  const Index d = dim_;
  switch (kind_) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture:
      return 2;
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture:
      return 2 * d + d * d;
    case TargetKind::kGaussianCopula:
      return d * d;
    case TargetKind::kTCopula:
      return d * d + 1;
    case TargetKind::kNormal:
      return d + d * d;
  }
  return 0;
}

Index TargetDescriptor::flat_size() const {
  return is_mixture() ? components_ * (1 + block_size()) : block_size();
}

std::string TargetDescriptor::name() const {
  const std::string d = std::to_string(dim_), k = std::to_string(components_);
  switch (kind_) {
    case TargetKind::kNegBin: return "negbin";
    case TargetKind::kNegBinMixture: return "negbin-mixture(" + k + ")";
    case TargetKind::kSkewNormal: return "skew-normal(" + d + ")";
    case TargetKind::kSkewNormalMixture: return "skew-normal-mixture(" + k + ", " + d + ")";
    case TargetKind::kGaussianCopula: return "gaussian-copula(" + d + ")";
    case TargetKind::kTCopula: return "t-copula(" + d + ")";
    case TargetKind::kNormal: return "normal(" + d + ")";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Typed parameters
// ---------------------------------------------------------------------------

void validate(const NegBinParams& p) {
  if (!(std::isfinite(p.r) && p.r > 0.0)) throw DomainError("negbin: r must be positive");
  if (!(p.s > 0.0 && p.s < 1.0)) throw DomainError("negbin: s must lie in (0, 1)");
}

void validate(const SkewNormalParams& p) {
  if (p.xi.size() != p.slant.size() || p.omega.rows() != p.xi.size()) {
    throw ShapeError("skew-normal: inconsistent block sizes");
  }
  if (!p.xi.allFinite() || !p.slant.allFinite()) throw DomainError("skew-normal: non-finite parameters");
  SpdMatrix omega(p.omega);
}

void validate(const CopulaParams& p) {
  if ((p.corr.diagonal().array() - 1.0).abs().maxCoeff() > kUnitDiagonalTol) {
    throw DomainError("copula: correlation matrix must have a unit diagonal");
  }
  SpdMatrix r(p.corr);
  if (p.nu && !(std::isfinite(*p.nu) && *p.nu > 2.0)) throw DomainError("t copula: nu must exceed 2");
}

Vec flatten(const NegBinParams& p) { return Vec{{p.r, p.s}}; }

Vec flatten(const SkewNormalParams& p) {
  const Index d = p.xi.size();
  Vec out(2 * d + d * d);
  out.head(d) = p.xi;
  put_matrix(out, d, p.omega);
  out.tail(d) = p.slant;
  return out;
}

Vec flatten(const CopulaParams& p) {
  const Index d = p.corr.rows();
  Vec out(d * d + (p.nu ? 1 : 0));
  put_matrix(out, 0, p.corr);
  if (p.nu) out[d * d] = *p.nu;
  return out;
}

namespace {
template <class C>
Vec flatten_mixture(const MixtureTargetParams<C>& p) {
  if (static_cast<Index>(p.components.size()) != p.weights.size()) {
    throw ShapeError("mixture: weight count differs from component count");
  }
  std::vector<Vec> blocks;
  Index total = p.weights.size();
  for (const auto& c : p.components) {
    blocks.push_back(flatten(c));
    total += blocks.back().size();
  }
  Vec out(total);
  out.head(p.weights.size()) = p.weights;
  Index offset = p.weights.size();
  for (const auto& b : blocks) {
    out.segment(offset, b.size()) = b;
    offset += b.size();
  }
  return out;
}
}  // namespace

Vec flatten(const MixtureTargetParams<NegBinParams>& p) { return flatten_mixture(p); }
Vec flatten(const MixtureTargetParams<SkewNormalParams>& p) { return flatten_mixture(p); }

NegBinParams as_negbin(const Vec& flat) {
  if (flat.size() != 2) throw ShapeError("negbin: expected 2 parameters");
  return {flat[0], flat[1]};
}

SkewNormalParams as_skew_normal(const Vec& flat, int d) {
  if (flat.size() != 2 * d + d * d) throw ShapeError("skew-normal: wrong parameter count");
  return {flat.head(d), block_matrix(flat, d, d), flat.tail(d)};
}

CopulaParams as_copula(const Vec& flat, int d, bool with_nu) {
  if (flat.size() != d * d + (with_nu ? 1 : 0)) throw ShapeError("copula: wrong parameter count");
  CopulaParams p{block_matrix(flat, 0, d), std::nullopt};
  if (with_nu) p.nu = flat[d * d];
  return p;
}

void validate(const TargetDescriptor& target, const Vec& theta) {
  if (theta.size() != target.flat_size()) {
    throw ShapeError(target.name() + ": expected " + std::to_string(target.flat_size()) + " parameters");
  }
  const int d = target.dim();
  switch (target.kind()) {
    case TargetKind::kNegBin:
      validate(as_negbin(theta));
      return;
    case TargetKind::kSkewNormal:
      validate(as_skew_normal(theta, d));
      return;
    case TargetKind::kGaussianCopula:
      validate(as_copula(theta, d, false));
      return;
    case TargetKind::kTCopula:
      validate(as_copula(theta, d, true));
      return;
    case TargetKind::kNormal:
      if (!theta.head(d).allFinite()) throw DomainError("normal: non-finite mean");
      SpdMatrix(block_matrix(theta, d, d));
      return;
    case TargetKind::kNegBinMixture:
    case TargetKind::kSkewNormalMixture: {
      const int k = target.components();
      validate_weights(theta.head(k));
      const Index b = target.block_size();
      for (int j = 0; j < k; ++j) {
        const Vec block = theta.segment(k + j * b, b);
        if (target.kind() == TargetKind::kNegBinMixture) {
          validate(as_negbin(block));
        } else {
          validate(as_skew_normal(block, d));
        }
      }
      return;
    }
  }
}

bool is_valid(const TargetDescriptor& target, const Vec& theta) {
  try {
    validate(target, theta);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Log densities
// ---------------------------------------------------------------------------

Evaluation log_likelihood(const TargetDescriptor& target, const Vec& theta, const Mat& x,
                          const Vec& weights, bool with_grad) {
  if (theta.size() != target.flat_size()) throw ShapeError(target.name() + ": wrong parameter count");
  const Vec w = effective_weights(weights, x.rows());
  switch (target.kind()) {
    case TargetKind::kNegBinMixture:
    case TargetKind::kSkewNormalMixture:
      return mixture_likelihood(target, theta, x, w, with_grad);
    case TargetKind::kGaussianCopula:
      return gaussian_copula_likelihood(block_matrix(theta, 0, target.dim()), x, w, with_grad);
    case TargetKind::kTCopula:
      return t_copula_likelihood(theta, target.dim(), x, w, with_grad);
    default: {
      const auto rows = component_rows(target, theta, x);
      Evaluation out;
      out.value = w.dot(rows->log_density());
      if (with_grad) out.grad = rows->weighted_gradient(w);
      return out;
    }
  }
}

Vec log_density_rows(const TargetDescriptor& target, const Vec& theta, const Mat& x) {
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kSkewNormal:
    case TargetKind::kNormal:
      return component_rows(target, theta, x)->log_density();
    default: {
      Vec out(x.rows());
      for (Index i = 0; i < x.rows(); ++i) out[i] = log_likelihood(target, theta, x.row(i), Vec(), false).value;
      return out;
    }
  }
}

Evaluation negbin_logpmf_grad(const NegBinParams& p, double x) {
  return log_likelihood(TargetDescriptor::negbin(), flatten(p), Mat::Constant(1, 1, x));
}

Evaluation skewnormal_logpdf_grad(const SkewNormalParams& p, const Vec& x) {
  return log_likelihood(TargetDescriptor::skew_normal(static_cast<int>(p.xi.size())), flatten(p),
                        x.transpose());
}

Evaluation negbin_mixture_logpmf_grad(const MixtureTargetParams<NegBinParams>& p, double x) {
  return log_likelihood(TargetDescriptor::negbin_mixture(static_cast<int>(p.weights.size())),
                        flatten(p), Mat::Constant(1, 1, x));
}

Evaluation skewnormal_mixture_logpdf_grad(const MixtureTargetParams<SkewNormalParams>& p,
                                          const Vec& x) {
  return log_likelihood(TargetDescriptor::skew_normal_mixture(static_cast<int>(p.weights.size()),
                                                              static_cast<int>(x.size())),
                        flatten(p), x.transpose());
}

Evaluation gaussian_copula_logpdf_grad(const Mat& corr, const Vec& u) {
  return log_likelihood(TargetDescriptor::gaussian_copula(static_cast<int>(corr.rows())),
                        flatten(CopulaParams{corr, std::nullopt}), u.transpose());
}

Evaluation t_copula_logpdf_grad(const CopulaParams& p, const Vec& u) {
  if (!p.nu) throw DomainError("t copula: nu is required");
  return log_likelihood(TargetDescriptor::t_copula(static_cast<int>(p.corr.rows())), flatten(p),
                        u.transpose());
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

Mat sample_component(const TargetDescriptor& target, const Vec& block, Index count, Rng& rng) {
  const int d = target.dim();
  Mat out(count, d);
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture: {
      const auto p = as_negbin(block);
      std::gamma_distribution<double> rate(p.r, (1.0 - p.s) / p.s);
      for (Index i = 0; i < count; ++i) {
        std::poisson_distribution<long long> counts(rate(rng));
        out(i, 0) = static_cast<double>(counts(rng));
      }
      return out;
    }
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture: {
      const auto p = as_skew_normal(block, d);
      const Vec omega_eta = p.omega * p.slant;
      const Vec delta = omega_eta / std::sqrt(1.0 + p.slant.dot(omega_eta));
      const SpdMatrix rest(numerics::symmetrize(p.omega - delta * delta.transpose()));
      const Mat& l = rest.cholesky().matrix();
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index i = 0; i < count; ++i) {
        const double u0 = std::fabs(normal(rng));
        out.row(i) = (p.xi + delta * u0 + l * standard_normal_vector(d, rng)).transpose();
      }
      return out;
    }
    case TargetKind::kNormal: {
      const SpdMatrix cov(block_matrix(block, d, d));
      for (Index i = 0; i < count; ++i) {
        out.row(i) = (block.head(d) + cov.cholesky().matrix() * standard_normal_vector(d, rng)).transpose();
      }
      return out;
    }
    case TargetKind::kGaussianCopula:
    case TargetKind::kTCopula: {
      const bool t = target.kind() == TargetKind::kTCopula;
      const auto p = as_copula(block, d, t);
      const SpdMatrix r(p.corr);
      std::chi_squared_distribution<double> chi(t ? *p.nu : 1.0);
      for (Index i = 0; i < count; ++i) {
        Vec z = r.cholesky().matrix() * standard_normal_vector(d, rng);
        if (t) z *= std::sqrt(*p.nu / chi(rng));
        for (int j = 0; j < d; ++j) out(i, j) = t ? numerics::student_t_cdf(z[j], *p.nu) : numerics::normal_cdf(z[j]);
      }
      return out;
    }
  }
  return out;
}

}  // namespace

Mat sample(const TargetDescriptor& target, const Vec& theta, Index count, Rng& rng) {
  validate(target, theta);
  if (count < 1) throw DomainError("sample: count must be at least 1");
  if (!target.is_mixture()) return sample_component(target, theta, count, rng);
  const int k = target.components();
  const Index b = target.block_size();
  const Vec pi = theta.head(k);
  std::discrete_distribution<int> pick(pi.data(), pi.data() + k);
  Mat out(count, target.dim());
  for (Index i = 0; i < count; ++i) {
    const int j = pick(rng);
    out.row(i) = sample_component(target, theta.segment(k + j * b, b), 1, rng).row(0);
  }
  return out;
}

Mat sample(const TargetDescriptor& target, const Vec& theta, Index count, std::uint64_t seed) {
  Rng rng(seed);
  return sample(target, theta, count, rng);
}

// ---------------------------------------------------------------------------
// Unconstrained coordinates
// ---------------------------------------------------------------------------

namespace {

Index free_block_size(const TargetDescriptor& target) {
  const Index d = target.dim();
  const Index chol = numerics::packed_lower_size(d);
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture:
      return 2;
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture:
      return 2 * d + chol;
    case TargetKind::kGaussianCopula:
      return chol;
    case TargetKind::kTCopula:
      return chol + 1;
    case TargetKind::kNormal:
      return d + chol;
  }
  return 0;
}

Vec block_from_free(const TargetDescriptor& target, const Vec& f) {
  const Index d = target.dim();
  const Index chol = numerics::packed_lower_size(d);
  Vec out(target.block_size());
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture:
      out << std::exp(f[0]), sigmoid(f[1]);
      break;
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture:
    case TargetKind::kNormal: {
      const Mat l = numerics::lower_from_packed(f.segment(d, chol), d);
      out.head(d) = f.head(d);
      put_matrix(out, d, l * l.transpose());
      if (target.kind() != TargetKind::kNormal) out.tail(d) = f.tail(d);
      break;
    }
    case TargetKind::kGaussianCopula:
    case TargetKind::kTCopula: {
      const Mat l = numerics::lower_from_packed(f.head(chol), d);
      put_matrix(out, 0, numerics::correlation_from_covariance(l * l.transpose()));
      if (target.kind() == TargetKind::kTCopula) out[d * d] = 2.0 + std::exp(f[chol]);
      break;
    }
  }
  return out;
}

Vec free_from_block(const TargetDescriptor& target, const Vec& b) {
  const Index d = target.dim();
  const Index chol = numerics::packed_lower_size(d);
  Vec out(free_block_size(target));
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture:
      out << std::log(b[0]), std::log(b[1]) - std::log1p(-b[1]);
      break;
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture:
    case TargetKind::kNormal:
      out.head(d) = b.head(d);
      out.segment(d, chol) = numerics::packed_from_lower(SpdMatrix(block_matrix(b, d, d)).cholesky().matrix());
      if (target.kind() != TargetKind::kNormal) out.tail(d) = b.tail(d);
      break;
    case TargetKind::kGaussianCopula:
    case TargetKind::kTCopula:
      out.head(chol) = numerics::packed_from_lower(SpdMatrix(block_matrix(b, 0, d)).cholesky().matrix());
      if (target.kind() == TargetKind::kTCopula) out[chol] = std::log(b[d * d] - 2.0);
      break;
  }
  return out;
}

Vec block_free_pullback(const TargetDescriptor& target, const Vec& f, const Vec& c) {
  const Index d = target.dim();
  const Index chol = numerics::packed_lower_size(d);
  Vec out(f.size());
  switch (target.kind()) {
    case TargetKind::kNegBin:
    case TargetKind::kNegBinMixture: {
      const double s = sigmoid(f[1]);
      out << c[0] * std::exp(f[0]), c[1] * s * (1.0 - s);
      break;
    }
    case TargetKind::kSkewNormal:
    case TargetKind::kSkewNormalMixture:
    case TargetKind::kNormal:
      out.head(d) = c.head(d);
      out.segment(d, chol) = numerics::packed_outer_pullback(f.segment(d, chol), d, block_matrix(c, d, d));
      if (target.kind() != TargetKind::kNormal) out.tail(d) = c.tail(d);
      break;
    case TargetKind::kGaussianCopula:
    case TargetKind::kTCopula: {
      const Mat l = numerics::lower_from_packed(f.head(chol), d);
      const Mat cot_cov = numerics::correlation_pullback(l * l.transpose(), block_matrix(c, 0, d));
      out.head(chol) = numerics::packed_outer_pullback(f.head(chol), d, cot_cov);
      if (target.kind() == TargetKind::kTCopula) out[chol] = c[d * d] * std::exp(f[chol]);
      break;
    }
  }
  return out;
}

}  // namespace

Index free_size(const TargetDescriptor& target) {
  return target.is_mixture() ? target.components() * (1 + free_block_size(target)) : free_block_size(target);
}

Vec flat_from_free(const TargetDescriptor& target, const Vec& free) {
  if (free.size() != free_size(target)) throw ShapeError(target.name() + ": wrong free-parameter count");
  if (!target.is_mixture()) return block_from_free(target, free);
  const int k = target.components();
  const Index fb = free_block_size(target), b = target.block_size();
  Vec out(target.flat_size());
  out.head(k) = softmax(free.head(k));
  for (int j = 0; j < k; ++j) out.segment(k + j * b, b) = block_from_free(target, free.segment(k + j * fb, fb));
  return out;
}

Vec free_from_flat(const TargetDescriptor& target, const Vec& theta) {
  validate(target, theta);
  if (!target.is_mixture()) return free_from_block(target, theta);
  const int k = target.components();
  const Index fb = free_block_size(target), b = target.block_size();
  Vec out(free_size(target));
  out.head(k) = theta.head(k).array().log();
  out.head(k).array() -= out.head(k).mean();
  for (int j = 0; j < k; ++j) out.segment(k + j * fb, fb) = free_from_block(target, theta.segment(k + j * b, b));
  return out;
}

Vec flat_from_free_pullback(const TargetDescriptor& target, const Vec& free, const Vec& cot_flat) {
  if (cot_flat.size() != target.flat_size()) throw ShapeError(target.name() + ": wrong cotangent size");
  if (!target.is_mixture()) return block_free_pullback(target, free, cot_flat);
  const int k = target.components();
  const Index fb = free_block_size(target), b = target.block_size();
  Vec out(free.size());
  const Vec pi = softmax(free.head(k));
  const Vec cpi = cot_flat.head(k);
  out.head(k) = pi.cwiseProduct((cpi.array() - pi.dot(cpi)).matrix());
  for (int j = 0; j < k; ++j) {
    out.segment(k + j * fb, fb) =
        block_free_pullback(target, free.segment(k + j * fb, fb), cot_flat.segment(k + j * b, b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

void LogRegModel::validate() const {
  if (labels.size() != design.rows()) throw ShapeError("logreg: label count differs from design rows");
  if (!(regularization > 0.0)) throw DomainError("logreg: regularization must be positive");
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) throw DomainError("logreg: labels must be -1 or +1");
  }
}

Evaluation logreg_logjoint_grad(const LogRegModel& model, const Vec& w) {
  model.validate();
  if (w.size() != model.dim()) throw ShapeError("logreg: weight dimension mismatch");
  const double d = static_cast<double>(w.size());
  Evaluation out;
  out.value = 0.5 * d * (std::log(model.regularization) - std::log(2.0 * std::numbers::pi)) -
              0.5 * model.regularization * w.squaredNorm();
  out.grad = -model.regularization * w;
  if (model.design.rows() == 0) return out;
  const Vec margins = model.labels.cwiseProduct(model.design * w);
  Vec coef(margins.size());
  for (Index i = 0; i < margins.size(); ++i) {
    out.value += log_sigmoid(margins[i]);
    coef[i] = model.labels[i] * sigmoid(-margins[i]);
  }
  out.grad += model.design.transpose() * coef;
  return out;
}

Vec logreg_map_estimate(const LogRegModel& model) {
  model.validate();
  Vec w = Vec::Zero(model.dim());
  for (int it = 0; it < 100; ++it) {
    const Vec grad = logreg_logjoint_grad(model, w).grad;
    Vec curv(model.design.rows());
    for (Index i = 0; i < curv.size(); ++i) {
      const double t = model.design.row(i).dot(w);
      curv[i] = sigmoid(t) * sigmoid(-t);
    }
    const Mat hess = model.design.transpose() * curv.asDiagonal() * model.design +
                     model.regularization * Mat::Identity(model.dim(), model.dim());
    const Vec step = hess.llt().solve(grad);
    w += step;
    if (step.norm() <= 1e-13 * std::max(1.0, w.norm())) return w;
  }
  throw ConvergenceError("logreg: Newton iteration for the MAP estimate did not converge");
}

}  // namespace sngd::targets
