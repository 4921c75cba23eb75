// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "scrapopt/bounded_lbfgs.hpp"
#include "scrapopt/sweep.hpp"

namespace scrapopt {

namespace {

double cap_of(const SystemParams& params, int k) {
  return k == 2 ? params.s0_cap : params.omega0_cap;
}

const Matrix3c& coupling_of(int k) {
  switch (k) {
    case 0: return pump_coupling();
    case 1: return stokes_coupling();
    default: return stark_coupling();
  }
}

double control_value(const ControlSample& c, int k) {
  switch (k) {
    case 0: return c.omega_p;
    case 1: return c.omega_s;
    default: return c.stark;
  }
}

// Largest relative envelope overshoot over the sampled schedule, with the
// offending control and sample time.
struct EnvelopeViolation {
  double v = 0.0;
  int control = -1;
  double t = 0.0;
};

EnvelopeViolation max_violation(std::span<const ControlSample> schedule,
                                const SystemParams& params) {
  EnvelopeViolation out;
  for (int k = 0; k < 3; ++k) {
    double peak = 0.0;
    int arg = 0;
    for (size_t j = 0; j < schedule.size(); ++j) {
      const double value = control_value(schedule[j], k);
      if (value > peak) {
        peak = value;
        arg = static_cast<int>(j);
      }
    }
    const double vk = (peak - cap_of(params, k)) / cap_of(params, k);
    if (vk > out.v) {
      out.v = vk;
      out.control = k;
      out.t = params.step_midpoint(arg);
    }
  }
  return out;
}

}  // namespace

ParameterBounds OptimizationProblem::bounds() const {
  ParameterBounds b;
  for (int k = 0; k < 3; ++k) {
    const double h_max = 0.23 * cap_of(base, k) * options.kappa;
    for (const auto& term : initial.terms[k]) {
      b.lower.insert(b.lower.end(),
                     {0.0, base.t_start, options.sigma_lower_factor * term.sigma});
      b.upper.insert(b.upper.end(),
                     {h_max, base.t_end, options.sigma_upper_factor * term.sigma});
    }
  }
  return b;
}

void OptimizationProblem::validate() const {
  base.validate();
  initial.validate();
  if (detuning_points.empty())
    throw std::invalid_argument("OptimizationProblem: needs at least one point");
  for (const auto& state : {rho0, target}) {
    if (state.hermiticity_error() > 1e-12)
      throw std::invalid_argument("OptimizationProblem: state not Hermitian");
    if (state.min_eigenvalue() < -1e-10)
      throw std::invalid_argument("OptimizationProblem: state not PSD");
  }
}

GradientVector GradientVector::zeros_like(const PulseSet& pulses) {
  GradientVector g;
  for (int k = 0; k < 3; ++k) g.terms[k].resize(pulses.terms[k].size());
  return g;
}

std::vector<double> GradientVector::flatten() const {
  std::vector<double> out;
  for (int k = 0; k < 3; ++k)
    for (const auto& term : terms[k])
      out.insert(out.end(), {term.dh, term.dtau, term.dsigma});
  return out;
}

std::vector<double> pack_parameters(const PulseSet& pulses) {
  std::vector<double> x;
  for (int k = 0; k < 3; ++k)
    for (const auto& term : pulses.terms[k])
      x.insert(x.end(), {term.h, term.tau, term.sigma});
  return x;
}

PulseSet unpack_parameters(std::span<const double> x, int q) {
  if (static_cast<int>(x.size()) != 9 * q)
    throw std::invalid_argument("unpack_parameters: size mismatch");
  PulseSet set;
  size_t i = 0;
  for (int k = 0; k < 3; ++k) {
    set.terms[k].resize(q);
    for (int n = 0; n < q; ++n) {
      set.terms[k][n] = {x[i], x[i + 1], x[i + 2]};
      i += 3;
    }
  }
  return set;
}

double fidelity(const DensityMatrix& rho_t, const DensityMatrix& target) {
  if (rho_t.hermiticity_error() > 1e-8 || target.hermiticity_error() > 1e-8)
    throw std::invalid_argument("fidelity: inputs must be Hermitian");
  return (target.m.adjoint() * rho_t.m).trace().real();
}

double control_gradient(const Matrix3c& lambda_j, const DensityMatrix& rho_j,
                        const Matrix3c& h_k, double dt) {
  const Matrix3c comm = h_k * rho_j.m - rho_j.m * h_k;
  const Complex value = -(lambda_j.adjoint() * Complex(0, dt) * comm).trace();
  if (std::abs(value.imag()) > 1e-12)
    throw NumericalFailure("control_gradient: non-real result");
  return value.real();
}

PointEvaluation parameter_gradients(const OptimizationProblem& problem,
                                    const PulseSet& pulses, DetuningPoint point) {
  SystemParams params = problem.base;
  params.delta_p = point.first;
  params.delta_s = point.second;

  const auto schedule = sample_schedule(pulses, params);
  std::vector<StepEigensystem> eigs;
  PropagationRecord record;
  try {
    record = propagate(problem.rho0, schedule, params, &eigs);
  } catch (const NumericalFailure& failure) {
    throw NumericalFailure("parameter_gradients at point (" +
                               std::to_string(point.first) + ", " +
                               std::to_string(point.second) + "): " +
                               failure.what(),
                           failure.step());
  }
  const auto costates = backward_costates(problem.target, record.propagators);

  PointEvaluation eval;
  eval.phi = fidelity(record.rho.back(), problem.target);
  eval.gradient = GradientVector::zeros_like(pulses);

  const double dt = params.dt();
  const int n = params.n_steps;
  for (int j = 0; j < n; ++j) {
    const Matrix3c h = build_hamiltonian(params, schedule[j]);
    const Matrix3c& rho_j = record.rho[j + 1].m;
    const Matrix3c& lam_j = costates[j];
    const double t = params.step_midpoint(j);
    for (int k = 0; k < 3; ++k) {
      const Matrix3c h_eff = effective_coupling(eigs[j], h, coupling_of(k),
                                                record.propagators[j], dt);
      // dPhi/du for the step, exact for the piecewise-constant propagator
      const double g_step = 2.0 * dt * (lam_j * h_eff * rho_j).trace().imag();
      auto& grads = eval.gradient.terms[k];
      const auto& terms = pulses.terms[k];
      for (size_t m = 0; m < terms.size(); ++m) {
        const double u = (t - terms[m].tau) / terms[m].sigma;
        const double e = std::exp(-u * u);
        grads[m].dh += g_step * e;
        grads[m].dtau += g_step * terms[m].h * 2.0 * (t - terms[m].tau) /
                         (terms[m].sigma * terms[m].sigma) * e;
        grads[m].dsigma += g_step * terms[m].h * 2.0 * (t - terms[m].tau) *
                           (t - terms[m].tau) /
                           (terms[m].sigma * terms[m].sigma * terms[m].sigma) * e;
      }
    }
  }
  return eval;
}

namespace {

PointEvaluation averaged_objective_impl(const OptimizationProblem& problem,
                                        const PulseSet& pulses, bool parallel) {
  const int d = static_cast<int>(problem.detuning_points.size());
  if (d < 1)
    throw std::invalid_argument("averaged_objective: needs at least one point");
  std::vector<PointEvaluation> evals(d);
  std::vector<std::string> errors(d);
  bool failed = false;

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < d; ++i) {
    try {
      evals[i] = parameter_gradients(problem, pulses, problem.detuning_points[i]);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        errors[i] = e.what();
        failed = true;
      }
    }
  }
  if (failed) {
    for (int i = 0; i < d; ++i)
      if (!errors[i].empty())
        throw NumericalFailure("averaged_objective: " + errors[i]);
  }

  PointEvaluation mean;
  mean.gradient = GradientVector::zeros_like(pulses);
  for (int i = 0; i < d; ++i) {
    mean.phi += evals[i].phi;
    for (int k = 0; k < 3; ++k)
      for (size_t m = 0; m < mean.gradient.terms[k].size(); ++m) {
        mean.gradient.terms[k][m].dh += evals[i].gradient.terms[k][m].dh;
        mean.gradient.terms[k][m].dtau += evals[i].gradient.terms[k][m].dtau;
        mean.gradient.terms[k][m].dsigma += evals[i].gradient.terms[k][m].dsigma;
      }
  }
  const double inv = 1.0 / d;
  mean.phi *= inv;
  for (int k = 0; k < 3; ++k)
    for (auto& term : mean.gradient.terms[k]) {
      term.dh *= inv;
      term.dtau *= inv;
      term.dsigma *= inv;
    }
  return mean;
}

// Mean final-state fidelity over the problem's points, no gradients.
double mean_fidelity_at_points(const OptimizationProblem& problem,
                               const PulseSet& pulses) {
  double sum = 0.0;
  for (const auto& point : problem.detuning_points) {
    SystemParams params = problem.base;
    params.delta_p = point.first;
    params.delta_s = point.second;
    const auto schedule = sample_schedule(pulses, params);
    sum += fidelity(final_density(problem.rho0, schedule, params), problem.target);
  }
  return sum / static_cast<double>(problem.detuning_points.size());
}

// Scales amplitudes down so every sampled envelope respects its cap.
PulseSet project_to_caps(PulseSet pulses, const SystemParams& params) {
  const auto schedule = sample_schedule(pulses, params);
  for (int k = 0; k < 3; ++k) {
    double peak = 0.0;
    for (const auto& sample : schedule)
      peak = std::max(peak, control_value(sample, k));
    const double cap = cap_of(params, k);
    if (peak > cap) {
      const double scale = cap / peak;
      for (auto& term : pulses.terms[k]) term.h *= scale;
    }
  }
  return pulses;
}

}  // namespace

PointEvaluation averaged_objective(const OptimizationProblem& problem,
                                   const PulseSet& pulses) {
  return averaged_objective_impl(problem, pulses, true);
}

PointEvaluation averaged_objective_serial(const OptimizationProblem& problem,
                                          const PulseSet& pulses) {
  return averaged_objective_impl(problem, pulses, false);
}

OptimizeResult optimize(const OptimizationProblem& problem) {
  problem.validate();
  const int q = problem.initial.q();
  const ParameterBounds box = problem.bounds();
  std::vector<double> x = pack_parameters(problem.initial);
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] < box.lower[i] - 1e-12 || x[i] > box.upper[i] + 1e-12)
      throw std::invalid_argument("optimize: initial pulse set violates bounds");

  const double beta = problem.options.penalty_beta;

  auto objective = [&](std::span<const double> xv,
                       std::span<double> grad) -> double {
    const PulseSet pulses = unpack_parameters(xv, q);
    const PointEvaluation eval = averaged_objective(problem, pulses);
    std::vector<double> g = eval.gradient.flatten();

    const auto schedule = sample_schedule(pulses, problem.base);
    const EnvelopeViolation violation = max_violation(schedule, problem.base);
    double pen = 0.0;
    if (violation.v > 0.0) {
      pen = beta * violation.v * violation.v;
      const double dpdv = 2.0 * beta * violation.v;
      const double cap = cap_of(problem.base, violation.control);
      const auto& terms = pulses.terms[violation.control];
      const size_t base_idx = static_cast<size_t>(violation.control) * q * 3;
      for (int m = 0; m < q; ++m) {
        const auto& term = terms[m];
        const double u = (violation.t - term.tau) / term.sigma;
        const double e = std::exp(-u * u);
        g[base_idx + 3 * m] -= dpdv / cap * e;
        g[base_idx + 3 * m + 1] -= dpdv / cap * term.h * 2.0 *
                                   (violation.t - term.tau) /
                                   (term.sigma * term.sigma) * e;
        g[base_idx + 3 * m + 2] -= dpdv / cap * term.h * 2.0 *
                                   (violation.t - term.tau) *
                                   (violation.t - term.tau) /
                                   (term.sigma * term.sigma * term.sigma) * e;
      }
    }
    for (size_t i = 0; i < grad.size(); ++i) grad[i] = -g[i];
    return -(eval.phi - pen);
  };

  OptimizeResult result;
  BoundedLbfgsOptions driver;
  driver.max_iters = problem.options.max_iters;
  driver.memory = problem.options.memory;
  driver.grad_tol = problem.options.grad_tol;
  driver.f_tol = problem.options.phi_tol;
  driver.on_iterate = [&](int iter, std::span<const double> xv, double f,
                          std::span<const double> g) {
    IterationStat stat;
    stat.iter = iter;
    stat.phi = -f;
    double pg2 = 0.0;
    for (size_t i = 0; i < xv.size(); ++i) {
      const double p = xv[i] - std::clamp(xv[i] - g[i], box.lower[i], box.upper[i]);
      pg2 += p * p;
    }
    stat.grad_norm = std::sqrt(pg2);
    const auto schedule =
        sample_schedule(unpack_parameters(xv, q), problem.base);
    for (const auto& sample : schedule) {
      stat.max_envelope_p = std::max(stat.max_envelope_p, sample.omega_p);
      stat.max_envelope_s = std::max(stat.max_envelope_s, sample.omega_s);
      stat.max_envelope_st = std::max(stat.max_envelope_st, sample.stark);
    }
    result.trace.push_back(stat);
  };

  result.initial_phi = mean_fidelity_at_points(problem, problem.initial);
  const BoundedLbfgsResult run =
      bounded_lbfgs_minimize(x, objective, box.lower, box.upper, driver);
  result.stop_reason = run.stop_reason;
  result.evaluations = run.evaluations;

  result.pulses = project_to_caps(unpack_parameters(x, q), problem.base);
  result.final_phi = mean_fidelity_at_points(problem, result.pulses);
  return result;
}

GreedyResult greedy_point_selection(const OptimizationProblem& problem,
                                    std::span<const DetuningPoint> candidates,
                                    const DetuningGrid& evaluation_grid,
                                    int budget, std::uint64_t seed) {
  if (candidates.empty())
    throw std::invalid_argument("greedy_point_selection: no candidates");
  if (budget < 1)
    throw std::invalid_argument("greedy_point_selection: budget must be >= 1");

  GreedyResult result;
  result.pulses = problem.initial;
  double best_score = -1.0;

  for (int round = 0; round < budget; ++round) {
    double round_best = -1.0;
    std::vector<size_t> round_ties;
    std::vector<OptimizeResult> round_results(candidates.size());

    for (size_t c = 0; c < candidates.size(); ++c) {
      if (std::find(result.points.begin(), result.points.end(), candidates[c]) !=
          result.points.end())
        continue;
      OptimizationProblem trial = problem;
      trial.detuning_points = result.points;
      trial.detuning_points.push_back(candidates[c]);
      round_results[c] = optimize(trial);
      const FidelityMap map =
          fidelity_map(round_results[c].pulses, evaluation_grid, problem.base);
      const double score = mean_fidelity(map);
      if (score > round_best) {
        round_best = score;
        round_ties = {c};
      } else if (score == round_best) {
        round_ties.push_back(c);
      }
    }
    if (round_ties.empty()) break;  // every candidate already chosen

    size_t pick = round_ties.front();
    if (round_ties.size() > 1) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(round));
      std::uniform_int_distribution<size_t> dist(0, round_ties.size() - 1);
      pick = round_ties[dist(rng)];
    }

    // The first round always keeps its best candidate; later rounds need a
    // strict improvement.
    if (round > 0 && round_best <= best_score) break;
    best_score = round_best;
    result.points.push_back(candidates[pick]);
    result.scores.push_back(round_best);
    result.pulses = round_results[pick].pulses;
    result.best = std::move(round_results[pick]);
  }
  return result;
}

}  // namespace scrapopt
