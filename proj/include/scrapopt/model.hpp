// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_MODEL_HPP
#define SCRAPOPT_MODEL_HPP

#include <optional>
#include <utility>

#include "scrapopt/types.hpp"

namespace scrapopt {

// All frequencies are expressed in units of 1/T_P, times in units of T_P,
// with hbar = 1.
struct SystemParams {
  double delta_p = 0.0;    // pump detuning
  double delta_s = 0.0;    // Stokes detuning
  double gamma = 0.0;      // decay rate out of the intermediate state
  double omega0_cap = 50.0;  // peak Rabi-frequency cap for pump and Stokes
  double s0_cap = 200.0;     // peak Stark-shift cap
  double t_start = -4.0;
  double t_end = 4.0;
  int n_steps = 800;

  double dt() const { return (t_end - t_start) / n_steps; }
  // Midpoint of step j, the time at which piecewise-constant controls are
  // sampled.
  double step_midpoint(int j) const { return t_start + (j + 0.5) * dt(); }
  // Boundary time of state index j (0..n_steps).
  double grid_time(int j) const { return t_start + j * dt(); }

  // Throws std::invalid_argument when any field is out of range.
  void validate() const;
};

// Instantaneous control values. All non-negative: `stark` holds S(t) = -S2(t),
// the magnitude of the (negative) Stark shift; the Hamiltonian assembly
// applies the sign.
struct ControlSample {
  double omega_p = 0.0;
  double omega_s = 0.0;
  double stark = 0.0;
};

struct DensityMatrix {
  Matrix3c m = Matrix3c::Zero();

  // Pure state |level><level| with level in {1, 2, 3}.
  static DensityMatrix pure(int level);

  double population(int level) const;  // real diagonal entry, level in {1,2,3}
  double trace_real() const { return m.trace().real(); }
  double hermiticity_error() const;  // max elementwise |m - m^dagger|
  double min_eigenvalue() const;     // smallest eigenvalue of the Hermitian part
};

// H = (1/2) [[0, Wp, 0], [Wp, 2(dp - S) - i G, Ws], [0, Ws, 2(dp - ds)]].
// Only element (2,2) is non-real, and only when gamma > 0.
Matrix3c build_hamiltonian(const SystemParams& params, const ControlSample& ctrl);

// Decomposition H = H0 + omega_p*Hp + omega_s*Hs + stark*Hst used by the
// gradient code. Hp = (1/2)(|1><2|+|2><1|), Hs = (1/2)(|2><3|+|3><2|),
// Hst = -|2><2|.
Matrix3c drift_hamiltonian(const SystemParams& params);
const Matrix3c& pump_coupling();
const Matrix3c& stokes_coupling();
const Matrix3c& stark_coupling();

// Diabatic energies E1 = 0, E2 = 2(dp - stark), E3 = 2(dp - ds).
struct DiabaticEnergies {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
};
DiabaticEnergies diabatic_energies(const SystemParams& params, double stark);

// Times where the Stark-shifted level crosses level 1 (t12) or level 3 (t23)
// for the Stark pulse S(t) = s0 * exp(-t^2 / t_st^2). A crossing exists only
// when s0 > delta > 0 strictly; absence is a valid result.
struct CrossingTimes {
  std::optional<std::pair<double, double>> t12;
  std::optional<std::pair<double, double>> t23;
};
CrossingTimes crossing_times(const SystemParams& params, double s0, double t_st);

enum class DetuningRegime { negative_two_photon, positive_two_photon, no_crossing };
const char* to_string(DetuningRegime regime);

// Classifies the detuning configuration:
//   dp > 0, ds > dp, s0 > ds  -> negative_two_photon (pump crossings inside
//                                the Stokes ones; standard pulse ordering)
//   dp > ds > 0, s0 > dp      -> positive_two_photon (reversed ordering)
//   otherwise                 -> no_crossing
DetuningRegime validate_regime(const SystemParams& params, double s0);

}  // namespace scrapopt

#endif
