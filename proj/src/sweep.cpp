// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scrapopt/dynamics.hpp"
#include "scrapopt/util.hpp"

namespace scrapopt {

void DetuningGrid::validate() const {
  if (x_axis.empty() || y_axis.empty())
    throw std::invalid_argument("DetuningGrid: axes must be non-empty");
  for (const auto* axis : {&x_axis, &y_axis})
    for (size_t i = 0; i < axis->size(); ++i) {
      if (!std::isfinite((*axis)[i]))
        throw std::invalid_argument("DetuningGrid: axes must be finite");
      if (i > 0 && (*axis)[i] <= (*axis)[i - 1])
        throw std::invalid_argument("DetuningGrid: axes must be strictly increasing");
    }
}

DetuningGrid default_grid() {
  DetuningGrid grid;
  const int n = 60;
  grid.x_axis.resize(n);
  grid.y_axis.resize(n);
  for (int i = 0; i < n; ++i) {
    grid.x_axis[i] = -80.0 + i * (78.0 / (n - 1));
    grid.y_axis[i] = 2.0 + i * (118.0 / (n - 1));
  }
  return grid;
}

int FidelityMap::nan_count() const {
  int count = 0;
  for (int i = 0; i < values.rows(); ++i)
    for (int j = 0; j < values.cols(); ++j)
      if (std::isnan(values(i, j))) ++count;
  return count;
}

void FidelityMap::validate() const {
  grid.validate();
  if (values.rows() != grid.ny() || values.cols() != grid.nx())
    throw std::invalid_argument("FidelityMap: dimensions do not match grid");
  for (int i = 0; i < values.rows(); ++i)
    for (int j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (!std::isnan(v) && (v < 0.0 || v > 1.0))
        throw std::invalid_argument("FidelityMap: value outside [0, 1]");
    }
}

namespace {

FidelityMap fidelity_map_impl(const PulseSet& pulses, const DetuningGrid& grid,
                              const SystemParams& base, bool parallel) {
  grid.validate();
  pulses.validate();
  FidelityMap map;
  map.grid = grid;
  map.values.resize(grid.ny(), grid.nx());

  const int cells = grid.ny() * grid.nx();
  const DensityMatrix rho0 = DensityMatrix::pure(1);

#pragma omp parallel for schedule(static) if (parallel)
  for (int c = 0; c < cells; ++c) {
    const int i = c / grid.nx();
    const int j = c % grid.nx();
    SystemParams params = base;
    params.delta_p = grid.y_axis[i];
    params.delta_s = grid.y_axis[i] - grid.x_axis[j];
    try {
      const auto schedule = sample_schedule(pulses, params);
      map.values(i, j) =
          final_density(rho0, schedule, params).m(2, 2).real();
    } catch (const std::exception&) {
      map.values(i, j) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return map;
}

}  // namespace

FidelityMap fidelity_map(const PulseSet& pulses, const DetuningGrid& grid,
                         const SystemParams& base) {
  return fidelity_map_impl(pulses, grid, base, true);
}

FidelityMap fidelity_map_serial(const PulseSet& pulses, const DetuningGrid& grid,
                                const SystemParams& base) {
  return fidelity_map_impl(pulses, grid, base, false);
}

double area_above(const FidelityMap& map, double threshold) {
  if (threshold <= 0.0 || threshold >= 1.0)
    throw std::invalid_argument("area_above: threshold must be in (0, 1)");
  int valid = 0;
  int above = 0;
  for (int i = 0; i < map.values.rows(); ++i)
    for (int j = 0; j < map.values.cols(); ++j) {
      const double v = map.values(i, j);
      if (std::isnan(v)) continue;
      ++valid;
      if (v > threshold) ++above;
    }
  if (valid == 0) throw UndefinedMetricError("area_above: all cells are NaN");
  return static_cast<double>(above) / static_cast<double>(valid);
}

double mean_fidelity(const FidelityMap& map) {
  int valid = 0;
  double sum = 0.0;
  for (int i = 0; i < map.values.rows(); ++i)
    for (int j = 0; j < map.values.cols(); ++j) {
      const double v = map.values(i, j);
      if (std::isnan(v)) continue;
      ++valid;
      sum += v;
    }
  if (valid == 0) throw UndefinedMetricError("mean_fidelity: all cells are NaN");
  return sum / static_cast<double>(valid);
}

LogIncreaseMap log_increase_map(const FidelityMap& before,
                                const FidelityMap& after) {
  if (before.grid.x_axis != after.grid.x_axis ||
      before.grid.y_axis != after.grid.y_axis)
    throw std::invalid_argument("log_increase_map: grids do not match");

  LogIncreaseMap out;
  out.grid = before.grid;
  out.log10_percent.resize(before.values.rows(), before.values.cols());
  out.sign.resize(before.values.rows(), before.values.cols());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double floor = 1e-30;

  for (int i = 0; i < before.values.rows(); ++i)
    for (int j = 0; j < before.values.cols(); ++j) {
      const double b = before.values(i, j);
      const double a = after.values(i, j);
      if (std::isnan(b) || std::isnan(a)) {
        out.log10_percent(i, j) = nan;
        out.sign(i, j) = 0;
      } else if (a > b) {
        out.log10_percent(i, j) = std::log10(100.0 * (a - b) / std::max(b, floor));
        out.sign(i, j) = 1;
      } else {
        out.log10_percent(i, j) = nan;
        out.sign(i, j) = a == b ? 0 : -1;
      }
    }
  return out;
}

namespace {

void write_matrix_csv(const DetuningGrid& grid, const Eigen::MatrixXd& values,
                      const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  for (int j = 0; j < grid.nx(); ++j) file << ',' << format_g17(grid.x_axis[j]);
  file << '\n';
  for (int i = 0; i < grid.ny(); ++i) {
    file << format_g17(grid.y_axis[i]);
    for (int j = 0; j < grid.nx(); ++j) file << ',' << format_g17(values(i, j));
    file << '\n';
  }
  if (!file) throw std::runtime_error("write failed: " + path);
}

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    if (cell.empty()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size())
      throw std::runtime_error("malformed CSV cell: " + cell);
    out.push_back(v);
  }
  return out;
}

}  // namespace

void write_map_csv(const FidelityMap& map, const std::string& path) {
  write_matrix_csv(map.grid, map.values, path);
}

FidelityMap read_map_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(file, line))
    throw std::runtime_error("empty map CSV: " + path);

  FidelityMap map;
  const auto header = parse_csv_row(line);
  // The corner cell before the x values is empty.
  map.grid.x_axis.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    auto row = parse_csv_row(line);
    if (row.size() != header.size())
      throw std::runtime_error("ragged map CSV: " + path);
    map.grid.y_axis.push_back(row.front());
    rows.push_back(std::move(row));
  }
  map.values.resize(static_cast<int>(rows.size()), map.grid.nx());
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < map.grid.nx(); ++j) map.values(i, j) = rows[i][j + 1];
  map.validate();
  return map;
}

void write_log_increase_csv(const LogIncreaseMap& map, const std::string& path) {
  write_matrix_csv(map.grid, map.log10_percent, path);
}

}  // namespace scrapopt
