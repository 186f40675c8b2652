#include <benchmark/benchmark.h>

#include "bidask/dynamics.hpp"
#include "bidask/model.hpp"
#include "bidask/risk.hpp"

static void BM_StepAmplitudes(benchmark::State& state) {
    const bidask::PriceOperator2x2 op{27.85, 27.86, {0.02, 0.0}};
    bidask::AmplitudeState psi;
    for (auto _ : state) {
        psi = bidask::step_amplitudes(psi, op, 1.0, 5.0);
        benchmark::DoNotOptimize(psi);
    }
}
BENCHMARK(BM_StepAmplitudes);

static void BM_SimulateTrajectory(benchmark::State& state) {
    bidask::ModelParams p;
    p.sigma = 0.001;
    p.xi1 = 0.02e-3;
    p.kappa0 = 0.35e-3;
    p.kappa1 = 0.17e-3;
    p.rho = bidask::rho_from_phase_scale(1.0, p.dt, 20.0);
    const auto steps = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            bidask::simulate_trajectory(bidask::AmplitudeState{}, p, steps, 1, 1.0));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SimulateTrajectory)->Arg(10000)->Arg(100000);

static void BM_EnsembleHistogram(benchmark::State& state) {
    bidask::ModelParams p;
    p.xi1 = 2.5e-3;
    p.kappa0 = 0.02;
    p.kappa1 = 5e-3;
    p.rho = bidask::rho_from_phase_scale(1.0, p.dt, 20.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            bidask::ensemble_population_histogram(p, 50, 1300, 16, 0, 1));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 50 * 1300);
}
BENCHMARK(BM_EnsembleHistogram)->Unit(benchmark::kMillisecond);

static void BM_SpreadVar95(benchmark::State& state) {
    const bidask::SpreadDistParams p{0.0, 0.26e-3, 0.32e-3, 0.016e-3};
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::spread_var95(p, 100000, 1, threads));
    }
}
BENCHMARK(BM_SpreadVar95)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
