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

#include "sngd/optim.hpp"

namespace sngd::optim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxHalvings = 60;
constexpr int kMaxExpansions = 200;
constexpr double kInvPhi = 0.6180339887498949;
}  // namespace

LineSearchResult exact_line_search(const std::function<double(double)>& phi, const LineSearchConfig& config) {
  LineSearchResult out;
  double best = 0.0, f_best = 0.0;
  auto eval = [&](double eps) {
    ++out.evaluations;
    double v;
    try {
      v = phi(eps);
    } catch (const Error&) {
      v = kInf;
    }
    if (!std::isfinite(v)) {
      ++out.infeasible;
      return kInf;
    }
    if (v < f_best) {
      best = eps;
      f_best = v;
    }
    return v;
  };

  const double f0 = phi(0.0);
  if (!std::isfinite(f0)) throw DomainError("line search: objective is not finite at the current point");
  f_best = f0;

  // A feasible first trial step.
  double b = config.initial;
  double fb = eval(b);
  for (int i = 0; fb == kInf && i < kMaxHalvings; ++i) {
    b *= 0.5;
    fb = eval(b);
  }
  if (fb == kInf) throw NoDecrease("line search: no feasible step");

  double a = 0.0, c = b;
  if (fb < f0) {
    // Expand until the objective rises again or the domain ends.
    for (int i = 0;; ++i) {
      if (i == kMaxExpansions) throw NoDecrease("line search: objective decreases without bound");
      c = b * config.growth;
      const double fc = eval(c);
      if (fc == kInf) {
        // Bisect towards the boundary of the feasible interval.
        bool bracketed = false;
        while (c - b > config.tolerance * c && out.evaluations < config.max_evaluations) {
          const double m = 0.5 * (b + c);
          const double fm = eval(m);
          if (fm == kInf) {
            c = m;
          } else if (fm < fb) {
            a = b;
            b = m;
            fb = fm;
          } else {
            c = m;
            bracketed = true;
            break;
          }
        }
        if (!bracketed) {
          out.step = best;
          out.value = f_best;
          return out;
        }
        break;
      }
      if (fc >= fb) break;
      a = b;
      b = c;
      fb = fc;
    }
  }

  // Golden-section search on [a, c].
  double x1 = c - kInvPhi * (c - a), x2 = a + kInvPhi * (c - a);
  double f1 = eval(x1), f2 = eval(x2);
  while (c - a > config.tolerance * std::max(best, 0.5 * (a + c)) && out.evaluations < config.max_evaluations) {
    if (f1 <= f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - kInvPhi * (c - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (c - a);
      f2 = eval(x2);
    }
  }
  if (!(f_best < f0)) throw NoDecrease("line search: no step lowers the objective");
  out.step = best;
  out.value = f_best;
  return out;
}

}  // namespace sngd::optim
