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

#include "akfrac/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "akfrac/error.hpp"

namespace akfrac {

namespace {

using Index = Eigen::Index;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Table& table) {
  if (static_cast<Index>(table.header.size()) != table.values.cols())
    throw ValidationError("csv header does not match the column count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (Index r = 0; r < table.values.rows(); ++r) {
    for (Index c = 0; c < table.values.cols(); ++c) out << (c ? "," : "") << format_double(table.values(r, c));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty csv");
  for (auto& h : split(line)) t.header.push_back(trim(h));
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      const std::string s = trim(c);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size())
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return t;
}

Table to_table(const SampledFn& f, const std::string& prefix) {
  Table t{{"t"}, Eigen::MatrixXd(f.values().rows(), 1)};
  t.values.col(0) = f.grid().nodes();
  append_columns(t, f, prefix);
  return t;
}

void append_columns(Table& table, const SampledFn& f, const std::string& prefix) {
  if (table.values.rows() != f.values().rows()) throw ValidationError("table row count mismatch");
  const Index old = table.values.cols();
  table.values.conservativeResize(Eigen::NoChange, old + f.cols());
  table.values.rightCols(f.cols()) = f.values();
  for (Index c = 0; c < f.cols(); ++c) table.header.push_back(prefix + std::to_string(c + 1));
}

SampledFn table_on_grid(const Table& table, const Grid& grid, const std::string& what) {
  if (table.header.empty() || table.header[0] != "t") throw ValidationError(what + ": first csv column must be t");
  if (table.values.rows() != static_cast<Index>(grid.size()))
    throw ValidationError(what + ": csv has " + std::to_string(table.values.rows()) + " rows, grid has " +
                          std::to_string(grid.size()) + " nodes");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.t(k);
    if (std::fabs(table.values(static_cast<Index>(k), 0) - t) > 1e-9 * (1.0 + std::fabs(t)))
      throw ValidationError(what + ": csv row " + std::to_string(k) + " is not at grid node t = " +
                            format_double(t));
  }
  return SampledFn(grid, table.values.rightCols(table.values.cols() - 1));
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace akfrac
