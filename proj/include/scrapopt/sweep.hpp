// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0
//
// Detuning-space fidelity maps and the summary metrics derived from them.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scrapopt/model.hpp"
#include "scrapopt/pulses.hpp"

namespace scrapopt {

// Rectangular detuning grid. The horizontal axis holds values of the
// two-photon detuning difference delta_p - delta_s, the vertical axis holds
// delta_p, both in units of 1/T_P.
struct DetuningGrid {
  std::vector<double> x_axis;
  std::vector<double> y_axis;

  void validate() const;
  int nx() const { return static_cast<int>(x_axis.size()); }
  int ny() const { return static_cast<int>(y_axis.size()); }
};

// The 60x60 grid used by the sweep defaults: delta_p in [2, 120] and
// delta_p - delta_s in [-80, -2].
DetuningGrid default_grid();

// Final-state transfer fidelities over a grid. values(i, j) corresponds to
// y_axis[i], x_axis[j]; cells whose propagation failed hold NaN.
struct FidelityMap {
  DetuningGrid grid;
  Eigen::MatrixXd values;

  int nan_count() const;
  void validate() const;
};

// Propagates |1><1| through the sampled schedule at every grid cell and
// records the final population of state 3. Cells are independent and run in
// parallel; the serial variant produces bitwise-identical values.
FidelityMap fidelity_map(const PulseSet& pulses, const DetuningGrid& grid,
                         const SystemParams& base);
FidelityMap fidelity_map_serial(const PulseSet& pulses, const DetuningGrid& grid,
                                const SystemParams& base);

// Fraction of non-NaN cells whose fidelity exceeds the threshold.
double area_above(const FidelityMap& map, double threshold);

// Arithmetic mean over non-NaN cells.
double mean_fidelity(const FidelityMap& map);

// Cell-wise log10 of the percentage fidelity increase. Cells without an
// increase (or with a NaN input) carry NaN; the sign channel distinguishes
// increase (+1), no change (0), and decrease (-1).
struct LogIncreaseMap {
  DetuningGrid grid;
  Eigen::MatrixXd log10_percent;
  Eigen::MatrixXi sign;
};

LogIncreaseMap log_increase_map(const FidelityMap& before,
                                const FidelityMap& after);

// CSV round trip: one header row of x values, one header column of y values,
// 17-significant-digit cells, NaN spelled "nan".
void write_map_csv(const FidelityMap& map, const std::string& path);
FidelityMap read_map_csv(const std::string& path);

void write_log_increase_csv(const LogIncreaseMap& map, const std::string& path);

}  // namespace scrapopt
