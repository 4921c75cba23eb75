// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/dynamics.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "scrapopt/util.hpp"

namespace scrapopt {

namespace {

constexpr double kConditionLimit = 1e8;

// Scaled Taylor series with repeated squaring; exact enough for any matrix we
// feed it since the scaled norm is <= 1/2.
Eigen::MatrixXcd taylor_expm(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm))) + 1;
  const Eigen::MatrixXcd t = a / std::pow(2.0, squarings);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd term = sum;
  for (int i = 1; i <= 18; ++i) {
    term = (term * t / static_cast<double>(i)).eval();
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

// phi(z) = (e^z - 1)/z with a series near 0.
Complex phi1(Complex z) {
  if (std::abs(z) < 1e-2) {
    return 1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 +
               z * (1.0 / 120 + z * (1.0 / 720)))));
  }
  return (std::exp(z) - 1.0) / z;
}

Matrix3c propagator_via_eigen(const Matrix3c& h, double dt, StepEigensystem* eig) {
  Eigen::ComplexEigenSolver<Matrix3c> solver(h, /*computeEigenvectors=*/true);
  if (solver.info() == Eigen::Success) {
    const Matrix3c v = solver.eigenvectors();
    const Matrix3c v_inv = v.inverse();
    if (v_inv.allFinite() && v.norm() * v_inv.norm() <= kConditionLimit) {
      const Vector3c w = solver.eigenvalues();
      Vector3c ph;
      for (int i = 0; i < 3; ++i) ph(i) = std::exp(Complex(0, -dt) * w(i));
      if (eig) {
        eig->v = v;
        eig->v_inv = v_inv;
        eig->w = w;
        eig->diagonalizable = true;
      }
      return v * ph.asDiagonal() * v_inv;
    }
  }
  if (eig) *eig = StepEigensystem{.diagonalizable = false};
  return taylor_expm(Complex(0, -dt) * h);
}

}  // namespace

Matrix3c step_propagator(const Matrix3c& h, double dt) {
  return step_propagator(h, dt, nullptr);
}

Matrix3c step_propagator(const Matrix3c& h, double dt, StepEigensystem* eig) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_propagator: dt must be > 0");
  if (!h.allFinite()) throw std::invalid_argument("step_propagator: H not finite");
  return propagator_via_eigen(h, dt, eig);
}

Matrix3c effective_coupling(const StepEigensystem& eig, const Matrix3c& h,
                            const Matrix3c& h_k, const Matrix3c& u, double dt) {
  if (eig.diagonalizable) {
    const Matrix3c g = eig.v_inv * h_k * eig.v;
    Matrix3c scaled;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        scaled(a, b) = g(a, b) * phi1(Complex(0, -dt) * (eig.w(a) - eig.w(b)));
    return eig.v * scaled * eig.v_inv;
  }
  // Near-defective step: get dU from the block-triangular exponential
  // exp([[A, E], [0, A]]) = [[e^A, dU], [0, e^A]] with A = -i dt H,
  // E = -i dt H_k, then solve dU = -i dt Hk_eff U for Hk_eff.
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(6, 6);
  block.topLeftCorner<3, 3>() = Complex(0, -dt) * h;
  block.bottomRightCorner<3, 3>() = Complex(0, -dt) * h;
  block.topRightCorner<3, 3>() = Complex(0, -dt) * h_k;
  const Matrix3c du = taylor_expm(block).topRightCorner<3, 3>();
  return Complex(0, 1.0 / dt) * du * u.inverse();
}

PropagationRecord propagate(const DensityMatrix& rho0,
                            std::span<const ControlSample> schedule,
                            const SystemParams& params,
                            std::vector<StepEigensystem>* eigs) {
  params.validate();
  const int n = params.n_steps;
  if (static_cast<int>(schedule.size()) != n)
    throw std::invalid_argument("propagate: schedule length does not match n_steps");

  PropagationRecord record;
  record.t_start = params.t_start;
  record.dt = params.dt();
  record.rho.reserve(n + 1);
  record.propagators.reserve(n);
  record.populations.reserve(n + 1);
  if (eigs) eigs->resize(n);

  record.rho.push_back(rho0);
  record.populations.emplace_back(rho0.m(0, 0).real(), rho0.m(1, 1).real(),
                                  rho0.m(2, 2).real());

  DensityMatrix rho = rho0;
  double prev_trace = rho.trace_real();
  for (int j = 0; j < n; ++j) {
    const Matrix3c h = build_hamiltonian(params, schedule[j]);
    const Matrix3c u =
        step_propagator(h, record.dt, eigs ? &(*eigs)[j] : nullptr);
    rho.m = u * rho.m * u.adjoint();

    if (!rho.m.allFinite())
      throw NumericalFailure("propagate: state turned non-finite", j);
    if (rho.hermiticity_error() > 1e-9)
      throw NumericalFailure("propagate: Hermiticity lost", j);
    if (rho.min_eigenvalue() < -1e-8)
      throw NumericalFailure("propagate: state lost positivity", j);
    const double tr = rho.trace_real();
    if (tr > prev_trace + 1e-8)
      throw NumericalFailure("propagate: trace increased", j);
    prev_trace = tr;

    record.propagators.push_back(u);
    record.rho.push_back(rho);
    record.populations.emplace_back(rho.m(0, 0).real(), rho.m(1, 1).real(),
                                    rho.m(2, 2).real());
  }
  return record;
}

DensityMatrix final_density(const DensityMatrix& rho0,
                            std::span<const ControlSample> schedule,
                            const SystemParams& params) {
  params.validate();
  const int n = params.n_steps;
  if (static_cast<int>(schedule.size()) != n)
    throw std::invalid_argument(
        "final_density: schedule length does not match n_steps");
  const double dt = params.dt();
  DensityMatrix rho = rho0;
  double prev_trace = rho.trace_real();
  for (int j = 0; j < n; ++j) {
    const Matrix3c h = build_hamiltonian(params, schedule[j]);
    const Matrix3c u = step_propagator(h, dt, nullptr);
    rho.m = u * rho.m * u.adjoint();
    if (!rho.m.allFinite())
      throw NumericalFailure("final_density: state turned non-finite", j);
    if (rho.hermiticity_error() > 1e-9)
      throw NumericalFailure("final_density: Hermiticity lost", j);
    if (rho.min_eigenvalue() < -1e-8)
      throw NumericalFailure("final_density: state lost positivity", j);
    const double tr = rho.trace_real();
    if (tr > prev_trace + 1e-8)
      throw NumericalFailure("final_density: trace increased", j);
    prev_trace = tr;
  }
  return rho;
}

std::vector<Matrix3c> backward_costates(const DensityMatrix& target,
                                        std::span<const Matrix3c> propagators) {
  const int n = static_cast<int>(propagators.size());
  if (n == 0) throw std::invalid_argument("backward_costates: empty propagators");
  std::vector<Matrix3c> costates(n);
  costates[n - 1] = target.m;
  for (int i = n - 2; i >= 0; --i)
    costates[i] = propagators[i + 1].adjoint() * costates[i + 1] * propagators[i + 1];
  return costates;
}

std::vector<TraceRow> population_trace(const PropagationRecord& record) {
  std::vector<TraceRow> rows;
  rows.reserve(record.populations.size());
  for (size_t j = 0; j < record.populations.size(); ++j) {
    const auto& p = record.populations[j];
    rows.push_back({record.t_start + static_cast<double>(j) * record.dt, p(0),
                    p(1), p(2)});
  }
  return rows;
}

void write_population_trace_csv(std::ostream& os, std::span<const TraceRow> rows) {
  os << "t,p1,p2,p3\n";
  for (const auto& row : rows) {
    os << format_g17(row.t) << ',' << format_g17(row.p1) << ','
       << format_g17(row.p2) << ',' << format_g17(row.p3) << '\n';
  }
}

}  // namespace scrapopt
