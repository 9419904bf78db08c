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

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "akfrac/grid.hpp"
#include "json.hpp"

namespace akfrac {

/// Column table written as CSV: one header name per column.
struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// Header line plus one row per node, every number printed with %.17g so that
/// a read-back reproduces the doubles bit for bit. Throws IoError.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

/// Table t, <prefix>1 .. <prefix>k.
Table to_table(const SampledFn& f, const std::string& prefix = "v");

/// Appends the columns of f (same grid) to a table that starts with t.
void append_columns(Table& table, const SampledFn& f, const std::string& prefix);

/// A table whose first column is t, checked node by node against the grid
/// (tolerance 1e-9 (1 + |t|)); returns the remaining columns.
SampledFn table_on_grid(const Table& table, const Grid& grid, const std::string& what);

/// Parse errors map to ValidationError, unreadable files to IoError.
nlohmann::json read_json(const std::filesystem::path& path);

/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace akfrac
