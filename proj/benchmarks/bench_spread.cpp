#include <benchmark/benchmark.h>

#include "bidask/bessel.hpp"
#include "bidask/calibration.hpp"
#include "bidask/spread_dist.hpp"

static void BM_LogBesselI0(benchmark::State& state) {
    // below 700 the power series runs, above it the asymptotic expansion
    const double x = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::log_bessel_i0(x));
    }
}
BENCHMARK(BM_LogBesselI0)->Arg(1)->Arg(50)->Arg(300)->Arg(699)->Arg(701)->Arg(100000);

static void BM_SpreadPdfZeroMean(benchmark::State& state) {
    const double d = 2e-4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::spread_pdf_zero_mean(d, 1.1e-4, 1.6e-4));
    }
}
BENCHMARK(BM_SpreadPdfZeroMean);

static void BM_SpreadLogpdfGeneral(benchmark::State& state) {
    // range(0): spread in units of the smaller scale; the angular
    // quadrature grows its node count with it
    bidask::SpreadDistParams p{0.0, 0.02e-3, 0.35e-3, 0.17e-3};
    const double d = static_cast<double>(state.range(0)) * 0.02e-3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::spread_logpdf_general(d, p));
    }
}
BENCHMARK(BM_SpreadLogpdfGeneral)->Arg(1)->Arg(8)->Arg(32)->Arg(128);

static void BM_SpreadLogpdfFolded(benchmark::State& state) {
    // one frozen component: closed-form path, no quadrature
    bidask::SpreadDistParams p{2.0, 0.0, 0.5, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::spread_logpdf_general(2.5, p));
    }
}
BENCHMARK(BM_SpreadLogpdfFolded);

static void BM_SampleSpreads(benchmark::State& state) {
    bidask::SpreadDistParams p{0.0, 0.32e-3, 0.48e-3, 0.27e-3};
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::sample_spreads(p, n, 1));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SampleSpreads)->Arg(1000)->Arg(100000);

static void BM_NegativeLogLikelihood(benchmark::State& state) {
    bidask::SpreadDistParams p{0.0, 0.32e-3, 0.48e-3, 0.27e-3};
    const auto sample = bidask::sample_spreads(p, static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::negative_log_likelihood(p, sample));
    }
}
BENCHMARK(BM_NegativeLogLikelihood)->Arg(1000)->Arg(10000);

static void BM_FitSpreadParams(benchmark::State& state) {
    bidask::SpreadDistParams p{0.0, 0.42e-3, 0.55e-3, 0.07e-3};
    const auto sample = bidask::sample_spreads(p, 20000, 3);
    bidask::FitOptions opt;
    opt.n_threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bidask::fit_spread_params(sample, opt));
    }
}
BENCHMARK(BM_FitSpreadParams)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
