// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_BOUNDED_LBFGS_HPP
#define SCRAPOPT_BOUNDED_LBFGS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace scrapopt {

// Box-constrained limited-memory BFGS minimizer:
//   - gradient-projection active-set masking of the search direction,
//   - two-loop recursion over the stored curvature pairs,
//   - monotone backtracking line search (Armijo, quadratic interpolation)
//     on the projected path x(a) = clip(x + a d).
// Robust against mild non-smoothness (kinks only shorten steps, they cannot
// produce an ascent).
struct BoundedLbfgsOptions {
  int max_iters = 500;
  int memory = 10;
  double grad_tol = 1e-6;  // projected-gradient 2-norm
  double f_tol = 1e-9;     // relative per-iteration improvement
  double armijo_c1 = 1e-4;
  int max_backtracks = 40;
  // Called after every accepted iterate with (iteration, x, f, gradient).
  std::function<void(int, std::span<const double>, double, std::span<const double>)>
      on_iterate;
};

struct BoundedLbfgsResult {
  std::vector<double> f_trace;  // objective after every accepted iterate
  int iterations = 0;
  int evaluations = 0;
  std::string stop_reason;
};

// Evaluates f(x) and writes the gradient into grad (same length as x).
using BoundObjective =
    std::function<double(std::span<const double> x, std::span<double> grad)>;

// Minimizes in place; x must start inside the bounds (it is clipped first).
BoundedLbfgsResult bounded_lbfgs_minimize(std::vector<double>& x,
                                          const BoundObjective& objective,
                                          std::span<const double> lower,
                                          std::span<const double> upper,
                                          const BoundedLbfgsOptions& options = {});

}  // namespace scrapopt

#endif
