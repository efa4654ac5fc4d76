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
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sngd/tasks.hpp"

namespace sngd::tasks {

using Eigen::Index;

// ---------------------------------------------------------------------------
// RawConfig
// ---------------------------------------------------------------------------

void RawConfig::set(const std::string& key, const std::string& value) {
  if (values_.count(key) == 0) order_.push_back(key);
  values_[key] = value;
}

std::optional<std::string> RawConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void RawConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  std::string key = assignment.substr(0, eq);
  boost::algorithm::trim(key);
  if (eq == std::string::npos || key.empty() || key.find('.') == std::string::npos) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  std::string value = assignment.substr(eq + 1);
  boost::algorithm::trim(value);
  set(key, value);
}

std::string RawConfig::to_text() const {
  // Group by section, keeping the order in which sections first appear.
  std::vector<std::string> sections;
  for (const auto& key : order_) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    if (std::find(sections.begin(), sections.end(), section) == sections.end()) sections.push_back(section);
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& section : sections) {
    if (!section.empty()) {
      if (!first) out << '\n';
      out << '[' << section << "]\n";
    }
    first = false;
    for (const auto& key : order_) {
      const auto dot = key.find('.');
      const std::string s = dot == std::string::npos ? "" : key.substr(0, dot);
      if (s != section) continue;
      out << (dot == std::string::npos ? key : key.substr(dot + 1)) << " = " << values_.at(key) << '\n';
    }
  }
  return out.str();
}

RawConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    const int line = static_cast<int>(e.line());
    throw ParseError("config: line " + std::to_string(line) + ": " + e.message(), line);
  }
  RawConfig raw;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      raw.set(name, node.data());
    } else {
      for (const auto& [key, leaf] : node) raw.set(name + "." + key, leaf.data());
    }
  }
  return raw;
}

RawConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  return parse_config(in);
}

namespace {

std::vector<std::string> split_grid(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    boost::algorithm::trim(item);
    items.push_back(item);
  }
  if (!value.empty() && value.back() == ',') items.emplace_back();
  return items;
}

}  // namespace

std::vector<RawConfig> expand_grid(const RawConfig& raw) {
  std::vector<RawConfig> cells{RawConfig{}};
  for (const auto& key : raw.keys()) {
    const std::string value = *raw.get(key);
    const auto items = value.find(',') == std::string::npos ? std::vector<std::string>{value} : split_grid(value);
    for (const auto& item : items) {
      if (item.empty()) throw ConfigError("config key '" + key + "' has an empty grid entry");
    }
    std::vector<RawConfig> next;
    next.reserve(cells.size() * items.size());
    for (const auto& cell : cells) {
      for (const auto& item : items) {
        RawConfig c = cell;
        c.set(key, item);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

std::string to_string(TaskKind kind) { return kind == TaskKind::kMle ? "mle" : "vi"; }

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSngd: return "sngd";
    case OptimizerKind::kGd: return "gd";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kNgdExact: return "ngd_exact";
  }
  return "unknown";
}

MapDescriptor ExperimentConfig::map() const { return MapDescriptor::from_id(map_id, dim, components); }

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment.name",        "experiment.task",          "experiment.map",
      "experiment.dim",         "experiment.components",    "experiment.seed",
      "experiment.repeats",     "optimizer.kind",           "optimizer.parameterization",
      "optimizer.step",         "optimizer.line_search_tolerance",
      "optimizer.aux_rule",     "optimizer.aux_step",       "optimizer.adam_lr",
      "optimizer.adam_beta1",   "optimizer.adam_beta2",     "optimizer.adam_epsilon",
      "optimizer.fisher_samples", "optimizer.ridge_scale",  "init.params",
      "data.source",            "data.path",                "data.header",
      "data.n",                 "data.true_params",         "vi.n",
      "vi.regularization",      "vi.separation",            "vi.mc_samples",
      "vi.eval_samples",        "stopping.max_iters",       "stopping.grad_norm_tol",
      "stopping.rel_obj_tol",   "output.dir",               "output.wall_clock"};
  return keys;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  std::optional<std::string> text(const std::string& key) const {
    auto v = raw_.get(key);
    if (v && v->find(',') != std::string::npos) throw ConfigError("config key '" + key + "' is an unexpanded grid");
    return v;
  }

  template <class T>
  std::optional<T> number(const std::string& key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    T out{};
    const char* begin = v->data();
    const char* end = begin + v->size();
    if (!v->empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (v->empty() || ec != std::errc() || ptr != end) {
      throw ConfigError("config key '" + key + "': cannot parse '" + *v + "' as a number");
    }
    return out;
  }

  std::optional<bool> boolean(const std::string& key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + *v + "'");
  }

  std::optional<Vec> vector(const std::string& key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    std::vector<double> items;
    std::istringstream in(*v);
    std::string token;
    while (in >> token) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ConfigError("config key '" + key + "': cannot parse '" + token + "' as a number");
      }
      items.push_back(x);
    }
    return Eigen::Map<const Vec>(items.data(), static_cast<Index>(items.size()));
  }

  template <class E>
  std::optional<E> choice(const std::string& key, const std::vector<std::pair<std::string, E>>& options) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    for (const auto& [name, value] : options) {
      if (*v == name) return value;
    }
    std::string allowed;
    for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ConfigError("config key '" + key + "': unknown value '" + *v + "' (expected one of " + allowed + ")");
  }

 private:
  const RawConfig& raw_;
};

template <class T>
void positive(const std::string& key, T value) {
  if (!(value > T{0})) throw ConfigError("config key '" + key + "' must be positive");
}

}  // namespace

ExperimentConfig resolve(const RawConfig& cell) {
  for (const auto& key : cell.keys()) {
    if (known_keys().count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  }
  const Reader r(cell);
  ExperimentConfig c;
  if (auto v = r.text("experiment.name")) c.name = *v;
  if (auto v = r.choice<TaskKind>("experiment.task", {{"mle", TaskKind::kMle}, {"vi", TaskKind::kVi}})) c.task = *v;
  c.map_id = c.task == TaskKind::kVi ? "vi-normal-identity" : "negbin";
  if (auto v = r.text("experiment.map")) c.map_id = *v;
  if (auto v = r.number<int>("experiment.dim")) c.dim = *v;
  if (auto v = r.number<int>("experiment.components")) c.components = *v;
  positive("experiment.dim", c.dim);
  positive("experiment.components", c.components);
  if (auto v = r.number<std::uint64_t>("experiment.seed")) c.seed = *v;
  if (auto v = r.number<int>("experiment.repeats")) c.repeats = *v;
  positive("experiment.repeats", c.repeats);

  const MapDescriptor map = c.map();  // throws ConfigError naming an unknown identifier
  if (c.task == TaskKind::kVi && map.kind() != maps::MapKind::kIdentity) {
    throw ConfigError("config key 'experiment.map': vi tasks use the 'vi-normal-identity' map, got '" + c.map_id + "'");
  }
  if (c.task == TaskKind::kMle && map.kind() == maps::MapKind::kIdentity) {
    throw ConfigError("config key 'experiment.map': '" + c.map_id + "' is a vi map");
  }

  if (auto v = r.choice<OptimizerKind>("optimizer.kind", {{"sngd", OptimizerKind::kSngd},
                                                          {"gd", OptimizerKind::kGd},
                                                          {"adam", OptimizerKind::kAdam},
                                                          {"ngd_exact", OptimizerKind::kNgdExact}})) {
    c.optimizer = *v;
  }
  c.coords = c.task == TaskKind::kMle ? expfam::Coordinates::kMean : expfam::Coordinates::kNatural;
  if (auto v = r.choice<expfam::Coordinates>(
          "optimizer.parameterization", {{"mean", expfam::Coordinates::kMean}, {"natural", expfam::Coordinates::kNatural}})) {
    c.coords = *v;
  }
  // Line search by default for deterministic tasks only.
  c.schedule = c.task == TaskKind::kMle ? optim::StepSchedule::exact() : optim::StepSchedule::constant(0.3);
  if (auto v = r.text("optimizer.step")) {
    if (*v == "exact") {
      if (c.task == TaskKind::kVi) throw ConfigError("config key 'optimizer.step': exact line search needs a deterministic task");
      c.schedule = optim::StepSchedule::exact();
    } else {
      const double step = *r.number<double>("optimizer.step");
      positive("optimizer.step", step);
      c.schedule = optim::StepSchedule::constant(step);
    }
  }
  if (auto v = r.number<double>("optimizer.line_search_tolerance")) {
    positive("optimizer.line_search_tolerance", *v);
    c.schedule.line_search.tolerance = *v;
  }
  if (auto v = r.choice<optim::AuxRule::Kind>("optimizer.aux_rule",
                                              {{"adam", optim::AuxRule::Kind::kAdam},
                                               {"gd", optim::AuxRule::Kind::kGd},
                                               {"line_search", optim::AuxRule::Kind::kLineSearch}})) {
    c.aux_rule.kind = *v;
  }
  if (auto v = r.number<double>("optimizer.aux_step")) c.aux_rule.step = *v;
  positive("optimizer.aux_step", c.aux_rule.step);
  if (auto v = r.number<double>("optimizer.adam_lr")) c.adam.learning_rate = *v;
  if (auto v = r.number<double>("optimizer.adam_beta1")) c.adam.beta1 = *v;
  if (auto v = r.number<double>("optimizer.adam_beta2")) c.adam.beta2 = *v;
  if (auto v = r.number<double>("optimizer.adam_epsilon")) c.adam.epsilon = *v;
  positive("optimizer.adam_lr", c.adam.learning_rate);
  if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0)) throw ConfigError("config key 'optimizer.adam_beta1' must lie in [0, 1)");
  if (!(c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0)) throw ConfigError("config key 'optimizer.adam_beta2' must lie in [0, 1)");
  positive("optimizer.adam_epsilon", c.adam.epsilon);
  c.aux_rule.adam = c.adam;
  if (auto v = r.number<Index>("optimizer.fisher_samples")) c.ngd.samples = *v;
  if (auto v = r.number<double>("optimizer.ridge_scale")) c.ngd.ridge_scale = *v;
  positive("optimizer.fisher_samples", c.ngd.samples);
  if (c.optimizer == OptimizerKind::kNgdExact && c.task == TaskKind::kVi) {
    throw ConfigError("config key 'optimizer.kind': ngd_exact is only available for mle tasks");
  }

  if (auto v = r.vector("init.params"); v && v->size() > 0) {
    if (v->size() != map.target_size()) {
      throw ConfigError("config key 'init.params' has " + std::to_string(v->size()) + " values, expected " +
                        std::to_string(map.target_size()));
    }
    c.init = *v;
  }

  if (auto v = r.choice<DataSpec::Source>("data.source",
                                          {{"synthetic", DataSpec::Source::kSynthetic}, {"csv", DataSpec::Source::kCsv}})) {
    c.data.source = *v;
  }
  if (auto v = r.text("data.path")) c.data.path = *v;
  if (c.data.source == DataSpec::Source::kCsv && c.data.path.empty()) throw ConfigError("config key 'data.path' is required for csv data");
  if (auto v = r.boolean("data.header")) c.data.header = *v;
  if (auto v = r.number<Index>("data.n")) c.data.n = *v;
  positive("data.n", c.data.n);
  if (auto v = r.vector("data.true_params"); v && v->size() > 0) {
    if (v->size() != map.target_size()) {
      throw ConfigError("config key 'data.true_params' has " + std::to_string(v->size()) + " values, expected " +
                        std::to_string(map.target_size()));
    }
    c.data.true_params = *v;
  }

  if (auto v = r.number<Index>("vi.n")) c.vi.n = *v;
  if (auto v = r.number<double>("vi.regularization")) c.vi.regularization = *v;
  if (auto v = r.number<double>("vi.separation")) c.vi.separation = *v;
  if (auto v = r.number<Index>("vi.mc_samples")) c.vi.mc_samples = *v;
  if (auto v = r.number<Index>("vi.eval_samples")) c.vi.eval_samples = *v;
  positive("vi.regularization", c.vi.regularization);
  positive("vi.mc_samples", c.vi.mc_samples);
  positive("vi.eval_samples", c.vi.eval_samples);
  if (c.vi.n < 0) throw ConfigError("config key 'vi.n' must be nonnegative");

  if (auto v = r.number<int>("stopping.max_iters")) c.stopping.max_iters = *v;
  if (auto v = r.number<double>("stopping.grad_norm_tol")) c.stopping.grad_norm_tol = *v;
  if (auto v = r.number<double>("stopping.rel_obj_tol")) c.stopping.rel_obj_tol = *v;
  if (c.stopping.max_iters < 0) throw ConfigError("config key 'stopping.max_iters' must be nonnegative");
  if (c.stopping.grad_norm_tol < 0) throw ConfigError("config key 'stopping.grad_norm_tol' must be nonnegative");
  if (c.stopping.rel_obj_tol < 0) throw ConfigError("config key 'stopping.rel_obj_tol' must be nonnegative");

  if (auto v = r.text("output.dir")) c.output_dir = *v;
  if (auto v = r.boolean("output.wall_clock")) c.record_wall_clock = *v;
  return c;
}

std::vector<RunDescriptor> plan_runs(const RawConfig& raw) {
  const auto cells = expand_grid(raw);
  std::vector<RunDescriptor> runs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto config = resolve(cells[i]);
    for (int rep = 0; rep < config.repeats; ++rep) {
      RunDescriptor d;
      d.cell = static_cast<int>(i);
      d.replicate = rep;
      d.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
      d.run_id = config.name + "-c" + std::to_string(i) + "-r" + std::to_string(rep);
      d.raw = cells[i];
      d.config = config;
      runs.push_back(std::move(d));
    }
  }
  return runs;
}

}  // namespace sngd::tasks
