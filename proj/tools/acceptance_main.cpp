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


// Prints one PASS/FAIL line per acceptance criterion and exits nonzero when
// any fails. Optional arguments select criteria by number.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "sngd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  bool ok = true;
  sngd::cli::run_acceptance(ids, [&](const sngd::cli::CriterionResult& r) {
    std::cout << sngd::cli::format_result(r) << std::endl;
    ok = ok && r.passed;
  });
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
