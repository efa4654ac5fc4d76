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
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sngd/cli.hpp"

namespace sngd::cli {
namespace {

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + g17(v[i]);
  return out;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <typename T>
T parse_field(const std::string& text, int line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError("trace csv: bad field '" + text + "'", line);
  return value;
}

}  // namespace

void emit_trace_csv(const std::string& run_id, const optim::OptTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << run_id << ',' << r.iteration << ',' << g17(r.wall_ms) << ',' << g17(r.objective) << ','
        << g17(r.grad_norm) << ',' << g17(r.step_size) << ',' << r.backtracks << '\n';
  }
}

void emit_trace_csv(const std::string& run_id, const optim::OptTrace& trace, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  emit_trace_csv(run_id, trace, out);
  if (!out) throw IoError("failed writing " + path.string());
}

TraceCsv read_trace_csv(std::istream& in) {
  TraceCsv csv;
  std::string line;
  int number = 1;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("trace csv: unexpected header", number);
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 7) throw ParseError("trace csv: expected 7 fields", number);
    optim::TraceRow row;
    row.iteration = parse_field<int>(fields[1], number);
    row.wall_ms = parse_field<double>(fields[2], number);
    row.objective = parse_field<double>(fields[3], number);
    row.grad_norm = parse_field<double>(fields[4], number);
    row.step_size = parse_field<double>(fields[5], number);
    row.backtracks = parse_field<int>(fields[6], number);
    csv.run_ids.push_back(fields[0]);
    csv.trace.rows.push_back(row);
  }
  return csv;
}

void write_manifest(const std::vector<tasks::RunOutcome>& outcomes, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  int failed = 0;
  for (const auto& o : outcomes) failed += o.error.has_value();
  out << "[manifest]\nruns = " << outcomes.size() << "\nfailed = " << failed << "\ncolumns = " << kTraceHeader
      << "\n";
  for (const auto& o : outcomes) {
    const auto& d = o.descriptor;
    out << "\n[run." << d.run_id << "]\n";
    out << "cell = " << d.cell << "\nreplicate = " << d.replicate << "\nseed = " << d.seed << '\n';
    out << "status = " << o.status << "\ncsv = " << d.run_id << ".csv\nconfig = " << d.run_id << ".ini\n";
    out << "iterations = " << (o.trace.rows.empty() ? 0 : o.trace.rows.back().iteration) << '\n';
    if (!o.trace.rows.empty()) out << "final_objective = " << g17(o.trace.rows.back().objective) << '\n';
    if (o.final_eval_objective) out << "final_eval_objective = " << g17(*o.final_eval_objective) << '\n';
    if (o.final_target.size() > 0) out << "final_params = " << join(o.final_target) << '\n';
    if (o.true_params.size() > 0) out << "true_params = " << join(o.true_params) << '\n';
    if (o.error) {
      // Keep the message on one line so the file stays parseable.
      std::string message = *o.error;
      for (char& c : message) {
        if (c == '\n' || c == '\r' || c == '#' || c == ';' || c == ',') c = ' ';
      }
      out << "error = " << message << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace sngd::cli
