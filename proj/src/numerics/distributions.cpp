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
#include <cmath>
#include <numbers>
#include <string>

#include "sngd/numerics.hpp"

namespace sngd::numerics {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
// Below this, erfc underflows and the log-CDF switches to its asymptotic
// expansion.
constexpr double kLowerTailCutoff = -35.0;

void require_open_unit(double p, const char* fn) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(fn) + ": probability must lie in (0, 1), got " +
                      std::to_string(p));
  }
}

// 1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸ - 945/x¹⁰, the ratio Φ(x)·(-x)/φ(x) for x → -∞.
double lower_tail_series(double x) {
  const double r = 1.0 / (x * x);
  return 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * (105.0 - r * 945.0))));
}

// Wichura, Algorithm AS 241 (PPND16).
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_log_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > kLowerTailCutoff) return std::log(normal_cdf(x));
  return normal_log_pdf(x) - std::log(-x) + std::log(lower_tail_series(x));
}

double normal_mills_ratio(double x) {
  if (x > kLowerTailCutoff) return std::exp(normal_log_pdf(x) - normal_log_cdf(x));
  return -x / lower_tail_series(x);
}

GaussianFunctions gaussian_functions(double x) { return {normal_log_pdf(x), normal_cdf(x)}; }

double normal_quantile(double p) {
  require_open_unit(p, "normal_quantile");
  double x = ppnd16(p);
  // One Halley step against the erfc-based CDF polishes the last bits.
  const double err = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
  const double pdf = std::exp(normal_log_pdf(x));
  if (pdf > 0.0) {
    const double u = err / pdf;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double student_t_log_pdf(double x, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("student_t_log_pdf: degrees of freedom must be > 0");
  }
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("student_t_cdf: degrees of freedom must be > 0");
  }
  if (x == 0.0) return 0.5;
  const double denom = nu + x * x;
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / denom, x * x / denom);
  return x < 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("student_t_quantile: degrees of freedom must be > 0");
  }
  require_open_unit(p, "student_t_quantile");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -student_t_quantile(1.0 - p, nu);

  // Lower tail: the root lies in (lo, 0).
  double hi = 0.0;
  double lo = std::min(-1.0, 2.0 * normal_quantile(p));
  while (student_t_cdf(lo, nu) > p) {
    hi = lo;
    lo *= 2.0;
    if (!std::isfinite(lo)) throw ConvergenceError("student_t_quantile: bracket overflow");
  }

  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 300;
  double x = std::clamp(normal_quantile(p), lo, hi);
  for (int it = 0; it < kMaxIter; ++it) {
    const double f = student_t_cdf(x, nu) - p;
    if (f == 0.0) return x;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double pdf = std::exp(student_t_log_pdf(x, nu));
    double next = pdf > 0.0 ? x - f / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= kTol * (1.0 + std::fabs(x)) || (hi - lo) <= kTol * (1.0 + std::fabs(x))) {
      return x;
    }
  }
  throw ConvergenceError("student_t_quantile: root-find did not converge");
}

}  // namespace sngd::numerics
