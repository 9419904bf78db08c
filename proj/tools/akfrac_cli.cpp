/*
 Copyright 2026 The akfrac Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// akfrac command-line front end: binds a JSON problem file to one library
// task and writes result.csv and report.json.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "akfrac.h"
#include "json.hpp"

namespace {

int fail(int code, const std::string& kind, const std::string& message) {
  const nlohmann::json j{{"error", kind}, {"exit_code", code}, {"message", message}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"akfrac: fractional operators with analytic kernels and optimal control"};
  app.set_version_flag("--version", std::string(akf_version()));
  app.require_subcommand(1);

  std::string problem;
  std::string out = ".";
  std::size_t grid_n = 0;
  double tol = 0.0;
  bool quiet = false;

  const std::vector<std::pair<std::string, std::vector<std::string>>> groups{
      {"op", {"apply", "check-duality", "check-ibp", "gronwall"}},
      {"kernel", {"dual", "semigroup"}},
      {"solve", {"fde", "ocp", "iso"}},
      {"check", {"pmp", "el"}},
  };
  std::string command;
  for (const auto& [group, actions] : groups) {
    CLI::App* g = app.add_subcommand(group, group + " commands");
    g->require_subcommand(1);
    for (const auto& action : actions) {
      CLI::App* a = g->add_subcommand(action);
      a->add_option("--problem", problem, "problem file (JSON)")->required();
      a->add_option("--out", out, "output directory")->capture_default_str();
      a->add_option("--grid-n", grid_n, "override grid.n")->check(CLI::PositiveNumber);
      a->add_option("--tol", tol, "override the task tolerance")->check(CLI::PositiveNumber);
      a->add_flag("--quiet", quiet, "no summary on stdout");
      a->callback([&command, name = group + " " + action] { command = name; });
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "validation", e.what());
  }

  const akf_run_options opts{grid_n, tol};
  const akf_status st = akf_run_task(command.c_str(), problem.c_str(), out.c_str(), &opts);
  if (st != AKF_OK) {
    std::fprintf(stderr, "%s\n", akf_last_error_json());
    return st == AKF_INTERNAL ? 2 : static_cast<int>(st);
  }
  if (!quiet) std::printf("%s: wrote %s/result.csv and %s/report.json\n", command.c_str(), out.c_str(), out.c_str());
  return 0;
}
