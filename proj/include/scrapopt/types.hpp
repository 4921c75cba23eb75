// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_TYPES_HPP
#define SCRAPOPT_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace scrapopt {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;
using Vector3d = Eigen::Vector3d;

// Propagation or gradient evaluation broke down (non-finite entries, state
// invariant violated beyond tolerance). Carries the step index when known.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, int step = -1)
      : std::runtime_error(step >= 0 ? what + " (step " + std::to_string(step) + ")"
                                     : what),
        step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

// A map metric was requested on data for which it is not defined.
class UndefinedMetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace scrapopt

#endif
