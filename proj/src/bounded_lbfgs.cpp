// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/bounded_lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace scrapopt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void clip_into(std::span<double> x, std::span<const double> lo,
               std::span<const double> hi) {
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

}  // namespace

BoundedLbfgsResult bounded_lbfgs_minimize(std::vector<double>& x,
                                          const BoundObjective& objective,
                                          std::span<const double> lower,
                                          std::span<const double> upper,
                                          const BoundedLbfgsOptions& options) {
  const size_t n = x.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("bounded_lbfgs_minimize: bound size mismatch");
  for (size_t i = 0; i < n; ++i)
    if (!(lower[i] <= upper[i]))
      throw std::invalid_argument("bounded_lbfgs_minimize: lower > upper");

  clip_into(x, lower, upper);
  std::vector<double> g(n), gn(n), d(n), q(n), xn(n), dx(n);
  double f = objective(x, g);

  BoundedLbfgsResult result;
  result.evaluations = 1;
  result.f_trace.push_back(f);
  result.stop_reason = "max_iters";

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> sy_hist;

  for (int it = 0; it < options.max_iters; ++it) {
    // projected gradient: x - clip(x - g)
    double pg_norm2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double step = x[i] - std::clamp(x[i] - g[i], lower[i], upper[i]);
      pg_norm2 += step * step;
    }
    if (std::sqrt(pg_norm2) < options.grad_tol) {
      result.stop_reason = "grad_tol";
      break;
    }

    // two-loop recursion on the full pairs; only the final direction is
    // masked to the free coordinates
    q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = dot(s_hist[i], q) / sy_hist[i];
      for (size_t j = 0; j < n; ++j) q[j] -= alpha[i] * y_hist[i][j];
    }
    double scale = 1.0 / std::max(norm2(g), 1.0);
    if (!s_hist.empty()) {
      const double yy = dot(y_hist.back(), y_hist.back());
      if (yy > 0.0) scale = sy_hist.back() / yy;
    }
    for (size_t j = 0; j < n; ++j) q[j] *= scale;
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = dot(y_hist[i], q) / sy_hist[i];
      for (size_t j = 0; j < n; ++j) q[j] += (alpha[i] - beta) * s_hist[i][j];
    }

    const double eps = 1e-12;
    for (size_t i = 0; i < n; ++i) {
      const bool fixed = (x[i] <= lower[i] + eps && g[i] > 0.0) ||
                         (x[i] >= upper[i] - eps && g[i] < 0.0);
      d[i] = fixed ? 0.0 : -q[i];
    }
    double gd = dot(g, d);
    if (gd > -1e-14) {
      for (size_t i = 0; i < n; ++i) {
        const bool fixed = (x[i] <= lower[i] + eps && g[i] > 0.0) ||
                           (x[i] >= upper[i] - eps && g[i] < 0.0);
        d[i] = fixed ? 0.0 : -g[i];
      }
      gd = dot(g, d);
      if (gd > -1e-14) {
        result.stop_reason = "no_descent_direction";
        break;
      }
    }

    double step = 1.0;
    double fn = f;
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      for (size_t i = 0; i < n; ++i)
        xn[i] = std::clamp(x[i] + step * d[i], lower[i], upper[i]);
      double dx_norm2 = 0.0;
      for (size_t i = 0; i < n; ++i) {
        dx[i] = xn[i] - x[i];
        dx_norm2 += dx[i] * dx[i];
      }
      if (dx_norm2 == 0.0) break;
      fn = objective(xn, gn);
      ++result.evaluations;
      if (fn <= f + options.armijo_c1 * dot(g, dx)) {
        accepted = true;
        break;
      }
      const double denom = 2.0 * (fn - f - step * gd);
      const double cand = denom > 0.0 ? -gd * step * step / denom : 0.5 * step;
      step = std::min(std::max(cand, 0.1 * step), 0.5 * step);
    }
    if (!accepted) {
      result.stop_reason = "line_search_stall";
      break;
    }

    // curvature pair
    double sy = 0.0, s_norm2 = 0.0, y_norm2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double si = xn[i] - x[i];
      const double yi = gn[i] - g[i];
      sy += si * yi;
      s_norm2 += si * si;
      y_norm2 += yi * yi;
    }
    if (sy > 1e-10 * std::sqrt(s_norm2) * std::sqrt(y_norm2)) {
      std::vector<double> s_new(n), y_new(n);
      for (size_t i = 0; i < n; ++i) {
        s_new[i] = xn[i] - x[i];
        y_new[i] = gn[i] - g[i];
      }
      s_hist.push_back(std::move(s_new));
      y_hist.push_back(std::move(y_new));
      sy_hist.push_back(sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        sy_hist.pop_front();
      }
    }

    const double rel = (f - fn) / std::max(std::abs(f), 1e-30);
    x = xn;
    f = fn;
    g = gn;
    ++result.iterations;
    result.f_trace.push_back(f);
    if (options.on_iterate) options.on_iterate(result.iterations, x, f, g);
    if (rel < options.f_tol) {
      result.stop_reason = "f_tol";
      break;
    }
  }
  return result;
}

}  // namespace scrapopt
