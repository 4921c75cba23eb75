// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0
//
// Compares the parallel kernels against their serial reference
// implementations and times the propagation core they share.

#include <benchmark/benchmark.h>

#include "scrapopt/dynamics.hpp"
#include "scrapopt/optimizer.hpp"
#include "scrapopt/sweep.hpp"

namespace {

using namespace scrapopt;

PulseSet table1() { return standard_scrap_pulses(50.0, 200.0, -1.0, -2.0, 1.0, 1.0, 2.0); }

SystemParams base_system(int n_steps) {
  SystemParams params;
  params.delta_p = 30.0;
  params.delta_s = 45.0;
  params.gamma = 1.0;
  params.n_steps = n_steps;
  return params;
}

DetuningGrid bench_grid(int n) {
  DetuningGrid grid;
  for (int i = 0; i < n; ++i) {
    grid.x_axis.push_back(-60.0 + i * (55.0 / (n - 1)));
    grid.y_axis.push_back(5.0 + i * (105.0 / (n - 1)));
  }
  return grid;
}

OptimizationProblem bench_problem(int n_steps) {
  OptimizationProblem problem;
  problem.base = base_system(n_steps);
  problem.initial = table1();
  problem.detuning_points = {{30.0, 45.0}, {70.0, 90.0}, {20.0, 60.0},
                             {50.0, 110.0}};
  return problem;
}

void BM_Propagate(benchmark::State& state) {
  const SystemParams params = base_system(static_cast<int>(state.range(0)));
  const auto schedule = sample_schedule(table1(), params);
  const DensityMatrix rho0 = DensityMatrix::pure(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(final_density(rho0, schedule, params));
}
BENCHMARK(BM_Propagate)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_FidelityMapParallel(benchmark::State& state) {
  const PulseSet pulses = table1();
  const DetuningGrid grid = bench_grid(static_cast<int>(state.range(0)));
  const SystemParams base = base_system(200);
  for (auto _ : state)
    benchmark::DoNotOptimize(fidelity_map(pulses, grid, base));
}
BENCHMARK(BM_FidelityMapParallel)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_FidelityMapSerial(benchmark::State& state) {
  const PulseSet pulses = table1();
  const DetuningGrid grid = bench_grid(static_cast<int>(state.range(0)));
  const SystemParams base = base_system(200);
  for (auto _ : state)
    benchmark::DoNotOptimize(fidelity_map_serial(pulses, grid, base));
}
BENCHMARK(BM_FidelityMapSerial)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_AveragedObjectiveParallel(benchmark::State& state) {
  const OptimizationProblem problem = bench_problem(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(averaged_objective(problem, problem.initial));
}
BENCHMARK(BM_AveragedObjectiveParallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_AveragedObjectiveSerial(benchmark::State& state) {
  const OptimizationProblem problem = bench_problem(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(averaged_objective_serial(problem, problem.initial));
}
BENCHMARK(BM_AveragedObjectiveSerial)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
