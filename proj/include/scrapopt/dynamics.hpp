// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_DYNAMICS_HPP
#define SCRAPOPT_DYNAMICS_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include "scrapopt/model.hpp"
#include "scrapopt/pulses.hpp"

namespace scrapopt {

// Eigendecomposition of one step Hamiltonian, kept around so gradient code can
// form exact propagator derivatives. When the eigenvector matrix is too
// ill-conditioned (near-defective H), `diagonalizable` is false and v/v_inv/w
// are not meaningful; the propagator came from a Taylor series instead.
struct StepEigensystem {
  Matrix3c v = Matrix3c::Identity();
  Matrix3c v_inv = Matrix3c::Identity();
  Vector3c w = Vector3c::Zero();
  bool diagonalizable = true;
};

// U = exp(-i dt H) for a general (non-Hermitian) 3x3 H, by eigendecomposition
// with a scaled Taylor/squaring fallback when the eigenvector condition
// exceeds 1e8.
Matrix3c step_propagator(const Matrix3c& h, double dt);
Matrix3c step_propagator(const Matrix3c& h, double dt, StepEigensystem* eig);

// Effective coupling matrix of a step: the exact directional derivative of
// the propagator is dU = -i dt Hk_eff U for a perturbation H -> H + eps H_k.
// Reduces to H_k itself as dt ||H|| -> 0.
Matrix3c effective_coupling(const StepEigensystem& eig, const Matrix3c& h,
                            const Matrix3c& h_k, const Matrix3c& u, double dt);

struct PropagationRecord {
  std::vector<DensityMatrix> rho;      // N+1 states, rho[0] = initial
  std::vector<Matrix3c> propagators;   // N step propagators
  std::vector<Vector3d> populations;   // N+1 diagonal triples
  double t_start = 0.0;
  double dt = 0.0;

  int steps() const { return static_cast<int>(propagators.size()); }
};

// rho_j = U_j rho_{j-1} U_j^dagger over the whole schedule. Throws
// NumericalFailure naming the step when a state turns non-finite, loses
// Hermiticity or positivity beyond tolerance, or gains trace.
// When `eigs` is non-null it receives the per-step eigensystems.
PropagationRecord propagate(const DensityMatrix& rho0,
                            std::span<const ControlSample> schedule,
                            const SystemParams& params,
                            std::vector<StepEigensystem>* eigs = nullptr);

// Final state only, same stepping and failure checks as propagate. The lean
// path for parameter sweeps.
DensityMatrix final_density(const DensityMatrix& rho0,
                            std::span<const ControlSample> schedule,
                            const SystemParams& params);

// lambda_N = C; lambda_j = U_{j+1}^dagger lambda_{j+1} U_{j+1}. Returned list
// holds lambda_1 ... lambda_N (index i stores lambda_{i+1}).
std::vector<Matrix3c> backward_costates(const DensityMatrix& target,
                                        std::span<const Matrix3c> propagators);

struct TraceRow {
  double t = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
};

// One row per stored state (N+1 rows including the initial one).
std::vector<TraceRow> population_trace(const PropagationRecord& record);

// CSV with header "t,p1,p2,p3", full double precision.
void write_population_trace_csv(std::ostream& os, std::span<const TraceRow> rows);

}  // namespace scrapopt

#endif
