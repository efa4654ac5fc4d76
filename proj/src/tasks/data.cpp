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


#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "sngd/tasks.hpp"

namespace sngd::tasks {

using Eigen::Index;
using targets::TargetKind;

Dataset::Dataset(Mat values, bool counts) : values_(std::move(values)), counts_(counts) {
  if (!values_.allFinite()) throw DomainError("dataset: non-finite entry");
  if (counts_) {
    for (Index j = 0; j < values_.cols(); ++j) {
      for (Index i = 0; i < values_.rows(); ++i) {
        const double v = values_(i, j);
        if (v < 0.0 || v != std::floor(v)) {
          throw DomainError("dataset: row " + std::to_string(i + 1) + " holds " + std::to_string(v) +
                            ", not a nonnegative integer count");
        }
      }
    }
  }
}

WeightedRows compress(const Dataset& data) {
  const Mat& x = data.values();
  std::map<std::vector<double>, Index> seen;
  std::vector<Index> first;
  std::vector<double> weight;
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<double> key(static_cast<std::size_t>(x.cols()));
    for (Index j = 0; j < x.cols(); ++j) key[static_cast<std::size_t>(j)] = x(i, j);
    auto [it, inserted] = seen.emplace(std::move(key), static_cast<Index>(first.size()));
    if (inserted) {
      first.push_back(i);
      weight.push_back(1.0);
    } else {
      weight[static_cast<std::size_t>(it->second)] += 1.0;
    }
  }
  WeightedRows out{Mat(static_cast<Index>(first.size()), x.cols()), Vec(static_cast<Index>(first.size()))};
  for (std::size_t r = 0; r < first.size(); ++r) {
    out.rows.row(static_cast<Index>(r)) = x.row(first[r]);
    out.weights[static_cast<Index>(r)] = weight[r];
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

double parse_field(std::string_view field, int line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
    throw ParseError("dataset: line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'", line);
  }
  return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const CsvOptions& options) {
  std::vector<std::vector<double>> rows;
  std::string text;
  int line = 0;
  bool header_pending = options.header;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::string_view rest(text);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), line));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("dataset: line " + std::to_string(line) + " has " + std::to_string(row.size()) +
                           " fields, expected " + std::to_string(rows.front().size()),
                       line);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("dataset: no observations", line);
  Mat values(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return Dataset(std::move(values), options.counts);
}

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset: cannot open " + path.string());
  return parse_dataset(in, options);
}

void write_dataset(const Dataset& data, std::ostream& out) {
  char buf[32];
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.values()(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("dataset: cannot write " + path.string());
  write_dataset(data, out);
  if (!out) throw IoError("dataset: write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

Vec skew_normal_protocol_params(int dim, Rng& rng) {
  const Index d = dim;
  const Vec xi = standard_normal_vector(d, rng);
  Mat w(d, d);
  for (Index j = 0; j < d; ++j) w.col(j) = standard_normal_vector(d, rng);
  Mat omega = w.transpose() * w / static_cast<double>(d);
  omega.diagonal().array() += 1e-4;
  const Vec slant = standard_normal_vector(d, rng);
  return targets::flatten(targets::SkewNormalParams{xi, numerics::symmetrize(omega), slant});
}

namespace {

Mat ar1_correlation(int dim, double rho) {
  Mat r(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) r(i, j) = std::pow(rho, std::abs(i - j));
  }
  return r;
}

Vec default_params(const TargetDescriptor& target, Rng& rng) {
  const int d = target.dim();
  const int k = target.components();
  switch (target.kind()) {
    case TargetKind::kNegBin:
      return Vec{{4.0, 0.4}};
    case TargetKind::kNegBinMixture: {
      targets::MixtureTargetParams<targets::NegBinParams> p;
      p.weights = Vec::Constant(k, 1.0 / k);
      // means 4, 18, 40, ...
      for (int i = 0; i < k; ++i) p.components.push_back({4.0 + 2.0 * i, 0.5 / (1.0 + i)});
      return targets::flatten(p);
    }
    case TargetKind::kSkewNormal:
      return skew_normal_protocol_params(d, rng);
    case TargetKind::kSkewNormalMixture: {
      targets::MixtureTargetParams<targets::SkewNormalParams> p;
      p.weights = Vec::Constant(k, 1.0 / k);
      for (int i = 0; i < k; ++i) {
        auto c = targets::as_skew_normal(skew_normal_protocol_params(d, rng), d);
        c.xi.array() += 4.0 * i;
        p.components.push_back(std::move(c));
      }
      return targets::flatten(p);
    }
    case TargetKind::kGaussianCopula:
      return targets::flatten(targets::CopulaParams{ar1_correlation(d, 0.5), std::nullopt});
    case TargetKind::kTCopula:
      return targets::flatten(targets::CopulaParams{ar1_correlation(d, 0.5), 5.0});
    case TargetKind::kNormal: {
      Vec out(d + d * d);
      out.head(d).setZero();
      out.tail(d * d) = Mat::Identity(d, d).reshaped();
      return out;
    }
  }
  throw ConfigError("synthetic: unsupported target");
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n < 1) throw DomainError("synthetic: n must be at least 1");
  Rng rng(seed);
  Vec params = spec.params.size() > 0 ? spec.params : default_params(spec.target, rng);
  targets::validate(spec.target, params);
  Mat x = targets::sample(spec.target, params, spec.n, rng);
  return {Dataset(std::move(x), spec.target.discrete()), spec.target, std::move(params)};
}

LogRegModel synthetic_logreg(Index n, int dim, double regularization, std::uint64_t seed, double separation) {
  if (n < 0 || dim < 1) throw DomainError("synthetic_logreg: invalid size");
  Rng rng(seed);
  LogRegModel model;
  model.design.resize(n, dim);
  model.labels.resize(n);
  model.regularization = regularization;
  const Vec centre = Vec::Constant(dim, separation / std::sqrt(static_cast<double>(dim)));
  for (Index i = 0; i < n; ++i) {
    const double y = i % 2 == 0 ? 1.0 : -1.0;
    model.labels[i] = y;
    model.design.row(i) = (y * centre + standard_normal_vector(dim, rng)).transpose();
  }
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Initial values
// ---------------------------------------------------------------------------

namespace {

targets::SkewNormalParams small_skew_normal(int d, Rng& rng) {
  return {0.01 * standard_normal_vector(d, rng), Mat::Identity(d, d), 0.01 * standard_normal_vector(d, rng)};
}

Mat small_correlation(int d, Rng& rng) {
  Mat w(d, d);
  for (int j = 0; j < d; ++j) w.col(j) = 0.01 * standard_normal_vector(d, rng);
  return numerics::correlation_from_covariance(Mat::Identity(d, d) + w.transpose() * w);
}

}  // namespace

Vec initial_params(const TargetDescriptor& target, Rng& rng, const Dataset* data) {
  const int d = target.dim();
  const int k = target.components();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (target.kind()) {
    case TargetKind::kNegBin: {
      const double s = 0.05 + 0.9 * unit(rng);
      std::gamma_distribution<double> gamma(6.25, 1.0 / 1.25);
      return Vec{{gamma(rng), s}};
    }
    case TargetKind::kNegBinMixture: {
      if (data == nullptr || data->rows() == 0) throw ConfigError("negbin mixture initialisation needs the data");
      const double x_max = std::max(1.0, data->values().maxCoeff());
      targets::MixtureTargetParams<targets::NegBinParams> p;
      p.weights = Vec::Constant(k, 1.0 / k);
      for (int i = 0; i < k; ++i) {
        const double mean = (0.1 + 0.8 * unit(rng)) * x_max;
        const double ratio = 1.0 / (0.001 + 0.019 * unit(rng));  // variance / mean
        // mean = r(1 - s)/s and variance = mean/s
        const double s = 1.0 / ratio;
        p.components.push_back({mean * s / (1.0 - s), s});
      }
      return targets::flatten(p);
    }
    case TargetKind::kSkewNormal:
      return targets::flatten(small_skew_normal(d, rng));
    case TargetKind::kSkewNormalMixture: {
      targets::MixtureTargetParams<targets::SkewNormalParams> p;
      p.weights = Vec::Constant(k, 1.0 / k);
      for (int i = 0; i < k; ++i) {
        auto c = small_skew_normal(d, rng);
        // Identical components would never separate; centre each on a data row.
        if (data != nullptr && data->rows() > 0) {
          std::uniform_int_distribution<Index> row(0, data->rows() - 1);
          c.xi += data->values().row(row(rng)).transpose();
        }
        p.components.push_back(std::move(c));
      }
      return targets::flatten(p);
    }
    case TargetKind::kGaussianCopula:
      return targets::flatten(targets::CopulaParams{small_correlation(d, rng), std::nullopt});
    case TargetKind::kTCopula:
      return targets::flatten(targets::CopulaParams{small_correlation(d, rng), 30.0});
    case TargetKind::kNormal: {
      Vec out(d + d * d);
      out.head(d) = 0.01 * standard_normal_vector(d, rng);
      out.tail(d * d) = Mat::Identity(d, d).reshaped();
      return out;
    }
  }
  throw ConfigError("initial_params: unsupported target");
}

}  // namespace sngd::tasks
