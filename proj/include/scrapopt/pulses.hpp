// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_PULSES_HPP
#define SCRAPOPT_PULSES_HPP

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "scrapopt/model.hpp"

namespace scrapopt {

// One Gaussian component h * exp(-(t - tau)^2 / sigma^2). Note the sigma^2
// convention: the exponent denominator is sigma^2, not 2 sigma^2.
struct GaussianTerm {
  double h = 0.0;      // amplitude, >= 0
  double tau = 0.0;    // center
  double sigma = 1.0;  // width, > 0
};

double gaussian_value(const GaussianTerm& term, double t);

enum class Control : int { pump = 0, stokes = 1, stark = 2 };
inline constexpr std::array<Control, 3> kControls = {Control::pump, Control::stokes,
                                                     Control::stark};
const char* to_string(Control k);

// Parameterized pulse envelopes: q Gaussian terms per control, same q for all
// three controls.
struct PulseSet {
  std::array<std::vector<GaussianTerm>, 3> terms;

  std::vector<GaussianTerm>& operator[](Control k) {
    return terms[static_cast<int>(k)];
  }
  const std::vector<GaussianTerm>& operator[](Control k) const {
    return terms[static_cast<int>(k)];
  }

  int q() const { return static_cast<int>(terms[0].size()); }

  // Throws std::invalid_argument on mismatched term counts, q < 1,
  // non-positive widths or negative amplitudes.
  void validate() const;
};

double sample_pulse(std::span<const GaussianTerm> terms, double t);

// The 27-term pulse set of the standard parameterization: 9 Gaussians per
// control with centers tau_k + {0, -.15, +.15, -.4, +.4, -.55, +.55, -1, +1}*T_k,
// widths {sqrt(.2) x3, sqrt(.25) x2, sqrt(.2) x2, sqrt(.32) x2}*T_k and all
// amplitudes 0.23*(cap of that control). The Stark control is centered at 0.
PulseSet standard_scrap_pulses(double omega0, double s0, double tau_p, double tau_s,
                               double t_p, double t_s, double t_st);

// The exact single-Gaussian pump/Stokes/Stark envelopes that the nine-term
// construction approximates; baseline for comparisons and regression anchors.
std::function<ControlSample(double)> reference_gaussian_pulses(double omega0,
                                                               double s0,
                                                               double tau_p,
                                                               double tau_s,
                                                               double t_p,
                                                               double t_s,
                                                               double t_st);

// The same single-Gaussian envelopes as a q = 1 PulseSet.
PulseSet reference_pulse_set(double omega0, double s0, double tau_p, double tau_s,
                             double t_p, double t_s, double t_st);

// Samples every control at the midpoint of each of the N piecewise-constant
// intervals; negative sampled values are clamped to 0.
std::vector<ControlSample> sample_schedule(const PulseSet& pulses,
                                           const SystemParams& params);

}  // namespace scrapopt

#endif
