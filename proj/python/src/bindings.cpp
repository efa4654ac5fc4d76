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


// Python bindings: family conversions, experiment runs, the gradient suite
// and the acceptance checks.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sngd/cli.hpp"
#include "sngd/error.hpp"
#include "sngd/expfam.hpp"
#include "sngd/maps.hpp"
#include "sngd/tasks.hpp"

namespace py = pybind11;
using namespace sngd;
using expfam::FamilyDescriptor;

namespace {

py::dict outcome_dict(const tasks::RunOutcome& o) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(o.trace.rows.size()), 6);
  for (std::size_t i = 0; i < o.trace.rows.size(); ++i) {
    const auto& r = o.trace.rows[i];
    rows.row(static_cast<Eigen::Index>(i)) << r.iteration, r.wall_ms, r.objective, r.grad_norm, r.step_size,
        r.backtracks;
  }
  py::dict d;
  d["run_id"] = o.descriptor.run_id;
  d["cell"] = o.descriptor.cell;
  d["replicate"] = o.descriptor.replicate;
  d["seed"] = o.descriptor.seed;
  d["status"] = o.status;
  d["trace"] = rows;
  d["final_params"] = o.final_target;
  d["true_params"] = o.true_params;
  d["error"] = o.error ? py::cast(*o.error) : py::none();
  d["final_eval_objective"] = o.final_eval_objective ? py::cast(*o.final_eval_objective) : py::none();
  return d;
}

py::list run_config(const std::string& text, const std::vector<std::string>& overrides) {
  std::istringstream in(text);
  auto raw = tasks::parse_config(in);
  for (const auto& o : overrides) raw.apply_override(o);
  const auto runs = tasks::plan_runs(raw);
  py::list out;
  for (const auto& run : runs) {
    tasks::RunOutcome o;
    {
      py::gil_scoped_release release;
      o = tasks::execute_run(run);
    }
    out.append(outcome_dict(o));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_sngd, m) {
  m.doc() = "Surrogate natural gradient descent";
  m.attr("__version__") = SNGD_VERSION;

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<ShapeError>(m, "ShapeError", error);

  py::class_<FamilyDescriptor>(m, "Family")
      .def_static("gamma", &FamilyDescriptor::gamma)
      .def_static("normal", &FamilyDescriptor::normal, py::arg("dim"))
      .def_static("zero_mean_normal", &FamilyDescriptor::zero_mean_normal, py::arg("dim"))
      .def_static("mixture", &FamilyDescriptor::mixture, py::arg("components"), py::arg("component"))
      .def_property_readonly("name", &FamilyDescriptor::name)
      .def_property_readonly("dim", &FamilyDescriptor::dim)
      .def_property_readonly("components", &FamilyDescriptor::components)
      .def_property_readonly("param_size", &FamilyDescriptor::param_size)
      .def_property_readonly("standard_size", &FamilyDescriptor::standard_size)
      .def("__repr__", [](const FamilyDescriptor& f) { return "<sngd.Family " + f.name() + ">"; });

  m.def(
      "to_mean", [](const FamilyDescriptor& f, const Vec& eta) { return expfam::to_mean({f, eta}).values(); },
      py::arg("family"), py::arg("eta"), "Mean parameters μ = ∇A(η).");
  m.def(
      "to_natural", [](const FamilyDescriptor& f, const Vec& mu) { return expfam::to_natural({f, mu}).values(); },
      py::arg("family"), py::arg("mu"), "Natural parameters of the given mean parameters.");
  m.def(
      "log_partition", [](const FamilyDescriptor& f, const Vec& eta) { return expfam::log_partition({f, eta}); },
      py::arg("family"), py::arg("eta"));
  m.def(
      "standard_from_natural",
      [](const FamilyDescriptor& f, const Vec& eta) { return expfam::to_standard(expfam::NaturalParams{f, eta}).values(); },
      py::arg("family"), py::arg("eta"));
  m.def(
      "natural_from_standard",
      [](const FamilyDescriptor& f, const Vec& s) { return expfam::natural_from_standard({f, s}).values(); },
      py::arg("family"), py::arg("standard"));
  m.def(
      "sufficient_statistics",
      [](const FamilyDescriptor& f, const Vec& x) { return expfam::sufficient_statistics(f, x); }, py::arg("family"),
      py::arg("x"));

  m.def("map_ids", &maps::MapDescriptor::identifiers, "Identifiers accepted by experiment.map.");

  m.def("run_config", &run_config, py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
        "Runs every cell and replicate of a config given as INI text. Trace columns: iteration, wall_ms, "
        "objective, grad_norm, step_size, backtracks.");

  m.def(
      "gradient_suite",
      [](const std::string& scope, int points) {
        cli::GradSuiteOptions options;
        options.points = points;
        std::vector<py::tuple> out;
        for (const auto& item : cli::gradient_suite(cli::parse_scope(scope), options)) {
          out.push_back(py::make_tuple(item.scope, item.name, item.worst_rel_error, item.passed));
        }
        return out;
      },
      py::arg("scope") = "all", py::arg("points") = 10,
      "(scope, name, worst relative error, passed) per checked gradient.");

  m.def(
      "acceptance",
      [](const std::vector<int>& ids) {
        std::vector<cli::CriterionResult> results;
        {
          py::gil_scoped_release release;
          results = cli::run_acceptance(ids);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["id"] = r.id;
          d["title"] = r.title;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          d["seconds"] = r.seconds;
          out.append(d);
        }
        return out;
      },
      py::arg("ids") = std::vector<int>{});
}
