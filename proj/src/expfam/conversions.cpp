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

#include "sngd/expfam.hpp"

namespace sngd::expfam {
namespace {

using numerics::SpdMatrix;
using numerics::symmetrize;
using Index = Eigen::Index;

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kGammaMaxIter = 50;
constexpr double kGammaTol = 1e-12;
constexpr double kWeightSumTol = 1e-12;

Mat block_matrix(const Vec& v, Index offset, int d) {
  return Eigen::Map<const Mat>(v.data() + offset, d, d);
}

void set_block(Vec& v, Index offset, const Mat& m) {
  Eigen::Map<Mat>(v.data() + offset, m.rows(), m.cols()) = m;
}

Vec pack_normal(const Vec& head, const Mat& m) {
  Vec out(head.size() + m.size());
  out.head(head.size()) = head;
  set_block(out, head.size(), m);
  return out;
}

double log_sum_exp(const Vec& a) {
  const double mx = a.maxCoeff();
  return mx + std::log((a.array() - mx).exp().sum());
}

// ----------------------------------------------------------------- gamma ---

// Solves log α - ψ(α) = gap for α > 0 by Newton from Minka's initialisation.
double gamma_shape_from_gap(double gap) {
  if (!(gap > 0.0) || !std::isfinite(gap)) {
    throw DomainError("gamma mean parameters: need log(mu1) - mu2 > 0");
  }
  double shape = (3.0 - gap + std::sqrt((gap - 3.0) * (gap - 3.0) + 24.0 * gap)) / (12.0 * gap);
  for (int it = 0; it < kGammaMaxIter; ++it) {
    const double h = numerics::log_minus_digamma(shape) - gap;
    const double dh = 1.0 / shape - numerics::trigamma(shape);
    double next = shape - h / dh;
    if (!(next > 0.0)) next = 0.5 * shape;
    if (std::fabs(next - shape) <= kGammaTol * next) return next;
    shape = next;
  }
  throw ConvergenceError("gamma mean-to-natural inversion did not converge in 50 iterations");
}

GammaStandard gamma_from_natural(const Vec& eta) {
  if (!(eta[0] < 0.0) || !(eta[1] > -1.0) || !eta.allFinite()) {
    throw DomainError("gamma natural parameters: need eta1 < 0 and eta2 > -1");
  }
  return {eta[1] + 1.0, -eta[0]};
}

GammaStandard gamma_checked(const Vec& s) {
  if (!(s[0] > 0.0) || !(s[1] > 0.0) || !s.allFinite()) {
    throw DomainError("gamma standard parameters: need shape > 0 and rate > 0");
  }
  return {s[0], s[1]};
}

GammaStandard gamma_from_mean(const Vec& mu) {
  if (!(mu[0] > 0.0) || !mu.allFinite()) throw DomainError("gamma mean parameters: need mu1 > 0");
  const double shape = gamma_shape_from_gap(std::log(mu[0]) - mu[1]);
  return {shape, shape / mu[0]};
}

// ∇²A(η) for the gamma in natural coordinates.
Eigen::Matrix2d gamma_fisher(const GammaStandard& g) {
  Eigen::Matrix2d h;
  h << g.shape / (g.rate * g.rate), 1.0 / g.rate, 1.0 / g.rate, numerics::trigamma(g.shape);
  return h;
}

Vec solve_2x2(const Eigen::Matrix2d& m, const Vec& rhs) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(std::fabs(det) > 1e-14 * scale * scale)) {
    throw SingularSystem("2x2 system is numerically singular");
  }
  Vec out(2);
  out[0] = (m(1, 1) * rhs[0] - m(0, 1) * rhs[1]) / det;
  out[1] = (m(0, 0) * rhs[1] - m(1, 0) * rhs[0]) / det;
  return out;
}

// ------------------------------------------------------------- normal ----

struct NormalBlocks {
  Vec mean;
  Mat cov;
};

// η = (h, P) -> (m, Σ)
NormalBlocks normal_from_natural(const Vec& eta, int d, bool zero_mean) {
  const Index off = zero_mean ? 0 : d;
  const SpdMatrix precision(-2.0 * block_matrix(eta, off, d));
  NormalBlocks out;
  out.cov = precision.inverse();
  out.mean = zero_mean ? Vec(Vec::Zero(d)) : precision.solve(Vec(eta.head(d)));
  return out;
}

NormalBlocks normal_blocks(const Vec& v, int d, bool zero_mean) {
  const Index off = zero_mean ? 0 : d;
  return {zero_mean ? Vec(Vec::Zero(d)) : Vec(v.head(d)), block_matrix(v, off, d)};
}

// --------------------------------------------------------- primitives ----

Vec std_from_nat(const FamilyDescriptor& f, const Vec& eta);
Vec std_from_mean(const FamilyDescriptor& f, const Vec& mu);
Vec nat_from_std(const FamilyDescriptor& f, const Vec& s);
Vec mean_from_std(const FamilyDescriptor& f, const Vec& s);
double log_partition_of(const FamilyDescriptor& f, const Vec& eta);

Vec mixture_weights_from_std(const FamilyDescriptor& f, const Vec& s) {
  const int k = f.components();
  Vec w = s.head(k);
  if (!(w.array() > 0.0).all() || !w.allFinite() || std::fabs(w.sum() - 1.0) > kWeightSumTol) {
    throw DomainError("mixture weights must be positive and sum to 1");
  }
  return w;
}

Vec mixture_weights_from_mean(const FamilyDescriptor& f, const Vec& mu) {
  const int k = f.components();
  Vec w(k);
  w.head(k - 1) = mu.head(k - 1);
  w[k - 1] = 1.0 - mu.head(k - 1).sum();
  if (!(w.array() > 0.0).all() || !w.allFinite()) {
    throw DomainError("mixture mean parameters: weights must lie in the open simplex");
  }
  return w;
}

Vec std_from_nat(const FamilyDescriptor& f, const Vec& eta) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = gamma_from_natural(eta);
      return Vec{{g.shape, g.rate}};
    }
    case FamilyKind::kNormal: {
      const auto n = normal_from_natural(eta, d, false);
      return pack_normal(n.mean, n.cov);
    }
    case FamilyKind::kZeroMeanNormal:
      return pack_normal(Vec(), normal_from_natural(eta, d, true).cov);
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& c = f.component();
      const Index pc = c.param_size(), sc = c.standard_size();
      if (!eta.head(k - 1).allFinite()) throw DomainError("mixture natural parameters not finite");
      Vec out(f.standard_size());
      Vec logits(k);
      for (int i = 0; i < k; ++i) {
        const Vec eta_i = eta.segment(k - 1 + i * pc, pc);
        out.segment(k + i * sc, sc) = std_from_nat(c, eta_i);
        logits[i] = (i < k - 1 ? eta[i] : 0.0) + log_partition_of(c, eta_i);
      }
      const double lse = log_sum_exp(logits);
      out.head(k) = (logits.array() - lse).exp();
      return out;
    }
  }
  throw DomainError("unknown family");
}

Vec nat_from_std(const FamilyDescriptor& f, const Vec& s) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = gamma_checked(s);
      return Vec{{-g.rate, g.shape - 1.0}};
    }
    case FamilyKind::kNormal:
    case FamilyKind::kZeroMeanNormal: {
      const bool zm = f.kind() == FamilyKind::kZeroMeanNormal;
      const auto n = normal_blocks(s, d, zm);
      const SpdMatrix cov(n.cov);
      const Mat precision = cov.inverse();
      return pack_normal(zm ? Vec() : Vec(cov.solve(n.mean)), -0.5 * precision);
    }
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& c = f.component();
      const Index pc = c.param_size(), sc = c.standard_size();
      const Vec w = mixture_weights_from_std(f, s);
      Vec out(f.param_size());
      Vec a(k);
      for (int i = 0; i < k; ++i) {
        const Vec eta_i = nat_from_std(c, s.segment(k + i * sc, sc));
        out.segment(k - 1 + i * pc, pc) = eta_i;
        a[i] = log_partition_of(c, eta_i);
      }
      for (int i = 0; i < k - 1; ++i) out[i] = std::log(w[i] / w[k - 1]) - a[i] + a[k - 1];
      return out;
    }
  }
  throw DomainError("unknown family");
}

Vec mean_from_std(const FamilyDescriptor& f, const Vec& s) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = gamma_checked(s);
      return Vec{{g.shape / g.rate, numerics::digamma(g.shape) - std::log(g.rate)}};
    }
    case FamilyKind::kNormal: {
      const auto n = normal_blocks(s, d, false);
      SpdMatrix check(n.cov);
      return pack_normal(n.mean, n.cov + n.mean * n.mean.transpose());
    }
    case FamilyKind::kZeroMeanNormal: {
      SpdMatrix check(block_matrix(s, 0, d));
      return s;
    }
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& c = f.component();
      const Index pc = c.param_size(), sc = c.standard_size();
      const Vec w = mixture_weights_from_std(f, s);
      Vec out(f.param_size());
      out.head(k - 1) = w.head(k - 1);
      for (int i = 0; i < k; ++i) {
        out.segment(k - 1 + i * pc, pc) = w[i] * mean_from_std(c, s.segment(k + i * sc, sc));
      }
      return out;
    }
  }
  throw DomainError("unknown family");
}

Vec std_from_mean(const FamilyDescriptor& f, const Vec& mu) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = gamma_from_mean(mu);
      return Vec{{g.shape, g.rate}};
    }
    case FamilyKind::kNormal: {
      const auto n = normal_blocks(mu, d, false);
      const Mat cov = n.cov - n.mean * n.mean.transpose();
      SpdMatrix check(cov);
      return pack_normal(n.mean, cov);
    }
    case FamilyKind::kZeroMeanNormal: {
      SpdMatrix check(block_matrix(mu, 0, d));
      return mu;
    }
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& c = f.component();
      const Index pc = c.param_size(), sc = c.standard_size();
      const Vec w = mixture_weights_from_mean(f, mu);
      Vec out(f.standard_size());
      out.head(k) = w;
      for (int i = 0; i < k; ++i) {
        out.segment(k + i * sc, sc) = std_from_mean(c, mu.segment(k - 1 + i * pc, pc) / w[i]);
      }
      return out;
    }
  }
  throw DomainError("unknown family");
}

double log_partition_of(const FamilyDescriptor& f, const Vec& eta) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = gamma_from_natural(eta);
      return std::lgamma(g.shape) - g.shape * std::log(g.rate);
    }
    case FamilyKind::kNormal: {
      const SpdMatrix precision(-2.0 * block_matrix(eta, d, d));
      const Vec h = eta.head(d);
      return 0.5 * h.dot(precision.solve(h)) - 0.5 * precision.log_det() + 0.5 * d * kLog2Pi;
    }
    case FamilyKind::kZeroMeanNormal: {
      const SpdMatrix precision(-2.0 * block_matrix(eta, 0, d));
      return -0.5 * precision.log_det() + 0.5 * d * kLog2Pi;
    }
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& c = f.component();
      const Index pc = c.param_size();
      Vec a(k);
      for (int i = 0; i < k; ++i) {
        a[i] = (i < k - 1 ? eta[i] : 0.0) + log_partition_of(c, eta.segment(k - 1 + i * pc, pc));
      }
      if (!a.allFinite()) throw DomainError("mixture natural parameters not finite");
      return log_sum_exp(a);
    }
  }
  throw DomainError("unknown family");
}

// ---------------------------------------------------------- pullbacks ----

Vec std_from_nat_pb(const FamilyDescriptor& f, const Vec& eta, const Vec& c);
Vec std_from_mean_pb(const FamilyDescriptor& f, const Vec& mu, const Vec& c);
Vec nat_from_std_pb(const FamilyDescriptor& f, const Vec& s, const Vec& c);
Vec mean_from_std_pb(const FamilyDescriptor& f, const Vec& s, const Vec& c);

Vec std_from_nat_pb(const FamilyDescriptor& f, const Vec& eta, const Vec& c) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma:
      gamma_from_natural(eta);
      return Vec{{-c[1], c[0]}};
    case FamilyKind::kNormal: {
      const auto n = normal_from_natural(eta, d, false);
      const Vec g_mean = c.head(d);
      const Vec h = eta.head(d);
      const Mat g_cov = symmetrize(block_matrix(c, d, d)) +
                        0.5 * (g_mean * h.transpose() + h * g_mean.transpose());
      return pack_normal(n.cov * g_mean, 2.0 * n.cov * g_cov * n.cov);
    }
    case FamilyKind::kZeroMeanNormal: {
      const auto n = normal_from_natural(eta, d, true);
      return pack_normal(Vec(), 2.0 * n.cov * symmetrize(block_matrix(c, 0, d)) * n.cov);
    }
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& comp = f.component();
      const Index pc = comp.param_size(), sc = comp.standard_size();
      const Vec s = std_from_nat(f, eta);
      const Vec w = s.head(k);
      const Vec g_w = c.head(k);
      const Vec g_logits = w.array() * (g_w.array() - w.dot(g_w));
      Vec out(f.param_size());
      out.head(k - 1) = g_logits.head(k - 1);
      for (int i = 0; i < k; ++i) {
        const Vec eta_i = eta.segment(k - 1 + i * pc, pc);
        const Vec mean_i = mean_from_std(comp, s.segment(k + i * sc, sc));
        out.segment(k - 1 + i * pc, pc) =
            std_from_nat_pb(comp, eta_i, c.segment(k + i * sc, sc)) + g_logits[i] * mean_i;
      }
      return out;
    }
  }
  throw DomainError("unknown family");
}

Vec nat_from_std_pb(const FamilyDescriptor& f, const Vec& s, const Vec& c) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma:
      gamma_checked(s);
      return Vec{{c[1], -c[0]}};
    case FamilyKind::kNormal:
    case FamilyKind::kZeroMeanNormal: {
      const bool zm = f.kind() == FamilyKind::kZeroMeanNormal;
      const auto n = normal_blocks(s, d, zm);
      const Mat precision = SpdMatrix(n.cov).inverse();
      const Index off = zm ? 0 : d;
      Mat g_precision = -0.5 * symmetrize(block_matrix(c, off, d));
      Vec g_mean;
      if (!zm) {
        const Vec c_h = c.head(d);
        g_mean = precision * c_h;
        g_precision += 0.5 * (c_h * n.mean.transpose() + n.mean * c_h.transpose());
      }
      return pack_normal(g_mean, -precision * g_precision * precision);
    }
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& comp = f.component();
      const Index pc = comp.param_size(), sc = comp.standard_size();
      const Vec w = mixture_weights_from_std(f, s);
      const Vec c_nu = c.head(k - 1);
      const double c_nu_sum = c_nu.sum();
      Vec out(f.standard_size());
      for (int i = 0; i < k; ++i) {
        const Vec s_i = s.segment(k + i * sc, sc);
        const Vec mean_i = mean_from_std(comp, s_i);
        Vec total = c.segment(k - 1 + i * pc, pc);
        if (i < k - 1) {
          total -= c_nu[i] * mean_i;
          out[i] = c_nu[i] / w[i];
        } else {
          total += c_nu_sum * mean_i;
          out[i] = -c_nu_sum / w[i];
        }
        out.segment(k + i * sc, sc) = nat_from_std_pb(comp, s_i, total);
      }
      return out;
    }
  }
  throw DomainError("unknown family");
}

Vec mean_from_std_pb(const FamilyDescriptor& f, const Vec& s, const Vec& c) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      const auto g = gamma_checked(s);
      return Vec{{c[0] / g.rate + c[1] * numerics::trigamma(g.shape),
                  -c[0] * g.shape / (g.rate * g.rate) - c[1] / g.rate}};
    }
    case FamilyKind::kNormal: {
      const auto n = normal_blocks(s, d, false);
      const Mat g = symmetrize(block_matrix(c, d, d));
      return pack_normal(Vec(c.head(d)) + 2.0 * g * n.mean, g);
    }
    case FamilyKind::kZeroMeanNormal:
      return pack_normal(Vec(), symmetrize(block_matrix(c, 0, d)));
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& comp = f.component();
      const Index pc = comp.param_size(), sc = comp.standard_size();
      const Vec w = mixture_weights_from_std(f, s);
      Vec out(f.standard_size());
      for (int i = 0; i < k; ++i) {
        const Vec s_i = s.segment(k + i * sc, sc);
        const Vec c_i = c.segment(k - 1 + i * pc, pc);
        out[i] = c_i.dot(mean_from_std(comp, s_i)) + (i < k - 1 ? c[i] : 0.0);
        out.segment(k + i * sc, sc) = mean_from_std_pb(comp, s_i, w[i] * c_i);
      }
      return out;
    }
  }
  throw DomainError("unknown family");
}

Vec std_from_mean_pb(const FamilyDescriptor& f, const Vec& mu, const Vec& c) {
  const int d = f.dim();
  switch (f.kind()) {
    case FamilyKind::kGamma: {
      // Implicit differentiation: solve Jᵀx = c with J = ∂μ/∂(α, β).
      const auto g = gamma_from_mean(mu);
      Eigen::Matrix2d jt;
      jt << 1.0 / g.rate, numerics::trigamma(g.shape), -g.shape / (g.rate * g.rate), -1.0 / g.rate;
      return solve_2x2(jt, c);
    }
    case FamilyKind::kNormal: {
      const Vec m = mu.head(d);
      const Mat g = symmetrize(block_matrix(c, d, d));
      return pack_normal(Vec(c.head(d)) - 2.0 * g * m, g);
    }
    case FamilyKind::kZeroMeanNormal:
      return pack_normal(Vec(), symmetrize(block_matrix(c, 0, d)));
    case FamilyKind::kMixture: {
      const int k = f.components();
      const auto& comp = f.component();
      const Index pc = comp.param_size(), sc = comp.standard_size();
      const Vec w = mixture_weights_from_mean(f, mu);
      Vec out(f.param_size());
      Vec total_w(k);
      for (int i = 0; i < k; ++i) {
        const Vec mean_i = mu.segment(k - 1 + i * pc, pc) / w[i];
        const Vec c_mean_i = std_from_mean_pb(comp, mean_i, c.segment(k + i * sc, sc));
        out.segment(k - 1 + i * pc, pc) = c_mean_i / w[i];
        total_w[i] = c[i] - c_mean_i.dot(mean_i) / w[i];
      }
      out.head(k - 1) = total_w.head(k - 1).array() - total_w[k - 1];
      return out;
    }
  }
  throw DomainError("unknown family");
}

void require_family(const FamilyDescriptor& expected, const FamilyDescriptor& actual) {
  if (expected != actual) {
    throw ShapeError("family mismatch: " + expected.name() + " vs " + actual.name());
  }
}

void require_size(const Vec& v, Index n, const char* what) {
  if (v.size() != n) {
    throw ShapeError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                     std::to_string(v.size()));
  }
}

}  // namespace

// ------------------------------------------------------------ public API --

StandardParams to_standard(const NaturalParams& eta) {
  return {eta.family(), std_from_nat(eta.family(), eta.values())};
}

StandardParams to_standard(const MeanParams& mu) {
  return {mu.family(), std_from_mean(mu.family(), mu.values())};
}

NaturalParams natural_from_standard(const StandardParams& s) {
  return {s.family(), nat_from_std(s.family(), s.values())};
}

MeanParams mean_from_standard(const StandardParams& s) {
  return {s.family(), mean_from_std(s.family(), s.values())};
}

MeanParams to_mean(const NaturalParams& eta) {
  return {eta.family(), mean_from_std(eta.family(), std_from_nat(eta.family(), eta.values()))};
}

NaturalParams to_natural(const MeanParams& mu) {
  return {mu.family(), nat_from_std(mu.family(), std_from_mean(mu.family(), mu.values()))};
}

double log_partition(const NaturalParams& eta) {
  return log_partition_of(eta.family(), eta.values());
}

Vec to_standard_pullback(const NaturalParams& at, const Vec& cot_standard) {
  require_size(cot_standard, at.family().standard_size(), "to_standard_pullback");
  return std_from_nat_pb(at.family(), at.values(), cot_standard);
}

Vec to_standard_pullback(const MeanParams& at, const Vec& cot_standard) {
  require_size(cot_standard, at.family().standard_size(), "to_standard_pullback");
  return std_from_mean_pb(at.family(), at.values(), cot_standard);
}

Vec natural_from_standard_pullback(const StandardParams& at, const Vec& cot_natural) {
  require_size(cot_natural, at.family().param_size(), "natural_from_standard_pullback");
  return nat_from_std_pb(at.family(), at.values(), cot_natural);
}

Vec mean_from_standard_pullback(const StandardParams& at, const Vec& cot_mean) {
  require_size(cot_mean, at.family().param_size(), "mean_from_standard_pullback");
  return mean_from_std_pb(at.family(), at.values(), cot_mean);
}

Vec pullback_to_mean(const NaturalParams& at, const Vec& cot_mean) {
  const auto& f = at.family();
  require_size(cot_mean, f.param_size(), "pullback_to_mean");
  if (f.kind() == FamilyKind::kGamma) {
    return gamma_fisher(gamma_from_natural(at.values())) * cot_mean;
  }
  const Vec s = std_from_nat(f, at.values());
  return std_from_nat_pb(f, at.values(), mean_from_std_pb(f, s, cot_mean));
}

Vec pullback_to_natural(const MeanParams& at, const Vec& cot_natural) {
  const auto& f = at.family();
  require_size(cot_natural, f.param_size(), "pullback_to_natural");
  if (f.kind() == FamilyKind::kGamma) {
    return solve_2x2(gamma_fisher(gamma_from_mean(at.values())), cot_natural);
  }
  const Vec s = std_from_mean(f, at.values());
  return std_from_mean_pb(f, at.values(), nat_from_std_pb(f, s, cot_natural));
}

Vec dual_pullback(const FamilyDescriptor& family, const Vec& point, const Vec& cotangent,
                  PullbackDirection direction) {
  if (direction == PullbackDirection::kThroughToMean) {
    return pullback_to_mean(NaturalParams(family, point), cotangent);
  }
  return pullback_to_natural(MeanParams(family, point), cotangent);
}

double ef_kl(const NaturalParams& eta1, const NaturalParams& eta2) {
  require_family(eta1.family(), eta2.family());
  const MeanParams mu1 = to_mean(eta1);
  return log_partition(eta2) - log_partition(eta1) -
         (eta2.values() - eta1.values()).dot(mu1.values());
}

bool in_domain(const NaturalParams& eta) {
  if (!eta.values().allFinite()) return false;
  try {
    std_from_nat(eta.family(), eta.values());
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool in_domain(const MeanParams& mu) {
  if (!mu.values().allFinite()) return false;
  try {
    std_from_mean(mu.family(), mu.values());
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool in_domain(const StandardParams& s) {
  if (!s.values().allFinite()) return false;
  try {
    nat_from_std(s.family(), s.values());
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace sngd::expfam
