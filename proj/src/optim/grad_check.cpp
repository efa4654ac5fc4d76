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
#include <limits>

#include "sngd/optim.hpp"

namespace sngd::optim {

GradCheckReport grad_check_directions(const std::function<double(const Vec&)>& f, const Vec& gradient,
                                      const Vec& theta, const Mat& directions, double step, double tolerance) {
  if (gradient.size() != theta.size() || directions.rows() != theta.size()) {
    throw ShapeError("grad_check: inconsistent sizes");
  }
  GradCheckReport report;
  for (Eigen::Index j = 0; j < directions.cols(); ++j) {
    const Vec v = directions.col(j);
    const double fd = (f(theta + step * v) - f(theta - step * v)) / (2.0 * step);
    double err = std::fabs(gradient.dot(v) - fd) / std::max(1.0, std::fabs(fd));
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    if (report.worst < 0 || err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst = j;
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

GradCheckReport grad_check(const std::function<double(const Vec&)>& f, const Vec& gradient, const Vec& theta,
                           double step, double tolerance) {
  return grad_check_directions(f, gradient, theta, Mat::Identity(theta.size(), theta.size()), step, tolerance);
}

}  // namespace sngd::optim
