// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/pulses.hpp"

#include <cmath>

namespace scrapopt {

double gaussian_value(const GaussianTerm& term, double t) {
  const double u = (t - term.tau) / term.sigma;
  return term.h * std::exp(-u * u);
}

const char* to_string(Control k) {
  switch (k) {
    case Control::pump: return "pump";
    case Control::stokes: return "stokes";
    case Control::stark: return "stark";
  }
  return "unknown";
}

void PulseSet::validate() const {
  const size_t q0 = terms[0].size();
  if (q0 < 1) throw std::invalid_argument("PulseSet: q must be >= 1");
  for (Control k : kControls) {
    const auto& list = (*this)[k];
    if (list.size() != q0)
      throw std::invalid_argument(
          std::string("PulseSet: term count mismatch for control ") + to_string(k));
    for (const auto& term : list) {
      if (!(term.sigma > 0.0))
        throw std::invalid_argument("PulseSet: sigma must be > 0");
      if (!(term.h >= 0.0))
        throw std::invalid_argument("PulseSet: h must be >= 0");
      if (!std::isfinite(term.h) || !std::isfinite(term.tau) ||
          !std::isfinite(term.sigma))
        throw std::invalid_argument("PulseSet: non-finite term");
    }
  }
}

double sample_pulse(std::span<const GaussianTerm> terms, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("sample_pulse: t not finite");
  double sum = 0.0;
  for (const auto& term : terms) sum += gaussian_value(term, t);
  return sum;
}

PulseSet standard_scrap_pulses(double omega0, double s0, double tau_p, double tau_s,
                               double t_p, double t_s, double t_st) {
  if (!(t_p > 0.0) || !(t_s > 0.0) || !(t_st > 0.0))
    throw std::invalid_argument("standard_scrap_pulses: widths must be > 0");
  // Center offsets and squared width factors per term, in table order.
  static constexpr double offsets[9] = {0.0,   -0.15, 0.15, -0.4, 0.4,
                                        -0.55, 0.55,  -1.0, 1.0};
  static constexpr double width2[9] = {0.2, 0.2, 0.2, 0.25, 0.25,
                                       0.2, 0.2, 0.32, 0.32};
  PulseSet set;
  const double caps[3] = {omega0, omega0, s0};
  const double centers[3] = {tau_p, tau_s, 0.0};
  const double widths[3] = {t_p, t_s, t_st};
  for (int k = 0; k < 3; ++k) {
    auto& list = set.terms[k];
    list.resize(9);
    for (int n = 0; n < 9; ++n) {
      list[n].h = 0.23 * caps[k];
      list[n].tau = centers[k] + offsets[n] * widths[k];
      list[n].sigma = std::sqrt(width2[n]) * widths[k];
    }
  }
  return set;
}

std::function<ControlSample(double)> reference_gaussian_pulses(
    double omega0, double s0, double tau_p, double tau_s, double t_p, double t_s,
    double t_st) {
  if (!(t_p > 0.0) || !(t_s > 0.0) || !(t_st > 0.0))
    throw std::invalid_argument("reference_gaussian_pulses: widths must be > 0");
  return [=](double t) {
    ControlSample c;
    c.omega_p = gaussian_value({omega0, tau_p, t_p}, t);
    c.omega_s = gaussian_value({omega0, tau_s, t_s}, t);
    c.stark = gaussian_value({s0, 0.0, t_st}, t);
    return c;
  };
}

PulseSet reference_pulse_set(double omega0, double s0, double tau_p, double tau_s,
                             double t_p, double t_s, double t_st) {
  if (!(t_p > 0.0) || !(t_s > 0.0) || !(t_st > 0.0))
    throw std::invalid_argument("reference_pulse_set: widths must be > 0");
  PulseSet set;
  set[Control::pump] = {{omega0, tau_p, t_p}};
  set[Control::stokes] = {{omega0, tau_s, t_s}};
  set[Control::stark] = {{s0, 0.0, t_st}};
  return set;
}

std::vector<ControlSample> sample_schedule(const PulseSet& pulses,
                                           const SystemParams& params) {
  pulses.validate();
  params.validate();
  std::vector<ControlSample> out(params.n_steps);
  for (int j = 0; j < params.n_steps; ++j) {
    const double t = params.step_midpoint(j);
    out[j].omega_p = std::max(0.0, sample_pulse(pulses[Control::pump], t));
    out[j].omega_s = std::max(0.0, sample_pulse(pulses[Control::stokes], t));
    out[j].stark = std::max(0.0, sample_pulse(pulses[Control::stark], t));
  }
  return out;
}

}  // namespace scrapopt
