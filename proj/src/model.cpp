// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/model.hpp"

#include <algorithm>
#include <cmath>

namespace scrapopt {

namespace {

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

// The closed-form trigonometric eigenvalue formula loses half its digits
// near degenerate spectra (acos conditioning), which is exactly the projector
// case the positivity checks see most. The iterative solver stays at
// ~1e-15 * ||a||.
double hermitian_min_eigenvalue(const Matrix3c& a) {
  Eigen::SelfAdjointEigenSolver<Matrix3c> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

void SystemParams::validate() const {
  if (!all_finite({delta_p, delta_s, gamma, omega0_cap, s0_cap, t_start, t_end}))
    throw std::invalid_argument("SystemParams: non-finite field");
  if (gamma < 0.0) throw std::invalid_argument("SystemParams: gamma must be >= 0");
  if (omega0_cap <= 0.0)
    throw std::invalid_argument("SystemParams: omega0_cap must be > 0");
  if (s0_cap <= 0.0) throw std::invalid_argument("SystemParams: s0_cap must be > 0");
  if (!(t_end > t_start))
    throw std::invalid_argument("SystemParams: t_end must exceed t_start");
  if (n_steps < 2) throw std::invalid_argument("SystemParams: n_steps must be >= 2");
}

DensityMatrix DensityMatrix::pure(int level) {
  if (level < 1 || level > 3)
    throw std::invalid_argument("DensityMatrix::pure: level must be 1, 2 or 3");
  DensityMatrix rho;
  rho.m(level - 1, level - 1) = 1.0;
  return rho;
}

double DensityMatrix::population(int level) const {
  if (level < 1 || level > 3)
    throw std::invalid_argument("DensityMatrix::population: level must be 1, 2 or 3");
  return m(level - 1, level - 1).real();
}

double DensityMatrix::hermiticity_error() const {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  return hermitian_min_eigenvalue(0.5 * (m + m.adjoint()));
}

Matrix3c build_hamiltonian(const SystemParams& params, const ControlSample& ctrl) {
  if (!all_finite({ctrl.omega_p, ctrl.omega_s, ctrl.stark}) ||
      !all_finite({params.delta_p, params.delta_s, params.gamma}))
    throw std::invalid_argument("build_hamiltonian: non-finite input");
  Matrix3c h = Matrix3c::Zero();
  h(0, 1) = h(1, 0) = 0.5 * ctrl.omega_p;
  h(1, 2) = h(2, 1) = 0.5 * ctrl.omega_s;
  h(1, 1) = Complex(params.delta_p - ctrl.stark, -0.5 * params.gamma);
  h(2, 2) = params.delta_p - params.delta_s;
  return h;
}

Matrix3c drift_hamiltonian(const SystemParams& params) {
  return build_hamiltonian(params, ControlSample{});
}

const Matrix3c& pump_coupling() {
  static const Matrix3c hp = [] {
    Matrix3c m = Matrix3c::Zero();
    m(0, 1) = m(1, 0) = 0.5;
    return m;
  }();
  return hp;
}

const Matrix3c& stokes_coupling() {
  static const Matrix3c hs = [] {
    Matrix3c m = Matrix3c::Zero();
    m(1, 2) = m(2, 1) = 0.5;
    return m;
  }();
  return hs;
}

const Matrix3c& stark_coupling() {
  static const Matrix3c hst = [] {
    Matrix3c m = Matrix3c::Zero();
    m(1, 1) = -1.0;
    return m;
  }();
  return hst;
}

DiabaticEnergies diabatic_energies(const SystemParams& params, double stark) {
  if (!std::isfinite(stark) || stark < 0.0)
    throw std::invalid_argument("diabatic_energies: stark must be finite and >= 0");
  return {0.0, 2.0 * (params.delta_p - stark),
          2.0 * (params.delta_p - params.delta_s)};
}

CrossingTimes crossing_times(const SystemParams& params, double s0, double t_st) {
  if (!(s0 > 0.0) || !(t_st > 0.0))
    throw std::invalid_argument("crossing_times: s0 and t_st must be > 0");
  CrossingTimes out;
  auto solve = [&](double delta) -> std::optional<std::pair<double, double>> {
    if (!(delta > 0.0) || !(s0 > delta)) return std::nullopt;
    const double t = t_st * std::sqrt(std::log(s0 / delta));
    return std::pair{-t, t};
  };
  out.t12 = solve(params.delta_p);
  out.t23 = solve(params.delta_s);
  return out;
}

const char* to_string(DetuningRegime regime) {
  switch (regime) {
    case DetuningRegime::negative_two_photon: return "negative_two_photon";
    case DetuningRegime::positive_two_photon: return "positive_two_photon";
    case DetuningRegime::no_crossing: return "no_crossing";
  }
  return "unknown";
}

DetuningRegime validate_regime(const SystemParams& params, double s0) {
  const double dp = params.delta_p;
  const double ds = params.delta_s;
  if (dp > 0.0 && ds > dp && s0 > ds) return DetuningRegime::negative_two_photon;
  if (ds > 0.0 && dp > ds && s0 > dp) return DetuningRegime::positive_two_photon;
  return DetuningRegime::no_crossing;
}

}  // namespace scrapopt
