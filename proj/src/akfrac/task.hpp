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

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "akfrac/io.hpp"
#include "json.hpp"

namespace akfrac {

struct TaskOverrides {
  std::optional<std::size_t> grid_n;
  std::optional<double> tol;
};

struct TaskOutput {
  Table result;
  nlohmann::json report;
};

/// "op apply", "op check-duality", ..., "check el".
const std::vector<std::string>& task_commands();

/// Runs one command on a parsed problem document. Relative CSV paths are
/// resolved against base_dir. The report carries no metadata; callers add it.
TaskOutput run_task(const std::string& command, const nlohmann::json& problem,
                    const std::filesystem::path& base_dir, const TaskOverrides& overrides = {});

}  // namespace akfrac
