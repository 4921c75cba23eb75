// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_OPTIMIZER_HPP
#define SCRAPOPT_OPTIMIZER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "scrapopt/dynamics.hpp"
#include "scrapopt/model.hpp"
#include "scrapopt/pulses.hpp"

namespace scrapopt {

struct DetuningGrid;  // sweep module; used by greedy point selection

using DetuningPoint = std::pair<double, double>;  // (delta_p, delta_s)

struct OptimizerOptions {
  int max_iters = 500;
  int memory = 10;
  double grad_tol = 1e-6;
  double phi_tol = 1e-9;
  // Per-term amplitude headroom: h bounded by 0.23 * cap * kappa.
  double kappa = 1.1;
  double sigma_lower_factor = 0.5;
  double sigma_upper_factor = 4.0;
  // Envelope-cap penalty: quadratic in the relative overshoot, with slope 10
  // at the 1% allowance point (penalty_beta * v^2, d/dv = 2*beta*v = 10 at
  // v = 0.01 for beta = 500).
  double penalty_beta = 500.0;
};

struct ParameterBounds {
  std::vector<double> lower, upper;  // flattened (control, term, h/tau/sigma)
};

struct OptimizationProblem {
  SystemParams base;  // detunings overridden per point
  std::vector<DetuningPoint> detuning_points;
  PulseSet initial;
  DensityMatrix rho0 = DensityMatrix::pure(1);
  DensityMatrix target = DensityMatrix::pure(3);
  OptimizerOptions options;

  // Box bounds derived from the initial set: h in [0, 0.23*cap*kappa],
  // tau in [t_start, t_end], sigma in [lower_factor, upper_factor] * sigma0.
  ParameterBounds bounds() const;
  void validate() const;
};

struct TermGradient {
  double dh = 0.0, dtau = 0.0, dsigma = 0.0;
};

struct GradientVector {
  std::array<std::vector<TermGradient>, 3> terms;

  static GradientVector zeros_like(const PulseSet& pulses);
  std::vector<double> flatten() const;
};

// Parameter-vector layout shared by bounds, gradients and the quasi-Newton
// driver: controls in pump/stokes/stark order, q terms each, (h, tau, sigma).
std::vector<double> pack_parameters(const PulseSet& pulses);
PulseSet unpack_parameters(std::span<const double> x, int q);

// Phi0 = trace(C^dagger rho_T); the target-state population for a projector
// target.
double fidelity(const DensityMatrix& rho_t, const DensityMatrix& target);

// First-order step derivative dPhi0/du_k(j) = -<lambda_j | i dt [H_k, rho_j]>.
// The imaginary part must vanish to 1e-12 and is discarded after a check.
double control_gradient(const Matrix3c& lambda_j, const DensityMatrix& rho_j,
                        const Matrix3c& h_k, double dt);

struct PointEvaluation {
  double phi = 0.0;
  GradientVector gradient;
};

// One forward pass, one backward pass, then all 3*q*3 parameter derivatives
// by the chain rule through the sampled schedule. The step derivative uses
// the exact effective coupling of each step propagator, so the result matches
// central finite differences to first order in the FD step, not just to first
// order in dt.
PointEvaluation parameter_gradients(const OptimizationProblem& problem,
                                    const PulseSet& pulses, DetuningPoint point);

// Arithmetic mean of the per-point evaluations. Points are evaluated in
// parallel; the reduction order is fixed, so results are bitwise reproducible
// and identical to the serial variant.
PointEvaluation averaged_objective(const OptimizationProblem& problem,
                                   const PulseSet& pulses);
PointEvaluation averaged_objective_serial(const OptimizationProblem& problem,
                                          const PulseSet& pulses);

struct IterationStat {
  int iter = 0;
  double phi = 0.0;        // penalized ascent objective (non-decreasing)
  double grad_norm = 0.0;  // projected-gradient 2-norm
  double max_envelope_p = 0.0;
  double max_envelope_s = 0.0;
  double max_envelope_st = 0.0;
};

struct OptimizeResult {
  PulseSet pulses;
  std::vector<IterationStat> trace;
  double initial_phi = 0.0;  // mean fidelity of the initial set
  double final_phi = 0.0;    // mean fidelity of the returned set
  std::string stop_reason;
  int evaluations = 0;
};

// Bounded quasi-Newton ascent of the averaged fidelity minus the envelope-cap
// penalty. The returned pulse set is projected so every sampled envelope
// respects its cap. Throws std::invalid_argument when the initial set is
// infeasible for the bounds.
OptimizeResult optimize(const OptimizationProblem& problem);

struct GreedyResult {
  std::vector<DetuningPoint> points;  // in selection order
  std::vector<double> scores;         // evaluation-grid mean fidelity per round
  PulseSet pulses;                    // best pulses found
  OptimizeResult best;                // optimize() result for the chosen set
};

// Grows a detuning set greedily: each round re-optimizes from
// problem.initial for every candidate joined to the chosen set, scores by
// mean fidelity over evaluation_grid, and keeps the best candidate. Stops
// when no candidate improves the score or the budget is exhausted. The first
// round accepts the best candidate unconditionally. Exact score ties are
// broken by a seeded draw.
GreedyResult greedy_point_selection(const OptimizationProblem& problem,
                                    std::span<const DetuningPoint> candidates,
                                    const DetuningGrid& evaluation_grid,
                                    int budget, std::uint64_t seed = 0);

}  // namespace scrapopt

#endif
