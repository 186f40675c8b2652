#include "bidask/risk.hpp"

#include "bidask/errors.hpp"
#include "bidask/rng.hpp"
#include "bidask/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>
#include <vector>

namespace bidask {

namespace {

constexpr std::size_t kShards = 16;
constexpr std::size_t kBootstrapReps = 100;

// Fixed shard layout: draw counts and per-shard seeds do not depend on the
// thread count, so the pooled sample is a function of (params, n_mc, seed)
// alone.
std::vector<double> draw_pooled(const SpreadDistParams& params, std::size_t n_mc,
                                std::uint64_t seed, int n_threads) {
    std::vector<double> pooled(n_mc);
    std::array<std::pair<std::size_t, std::size_t>, kShards> ranges; // offset, count
    std::size_t off = 0;
    for (std::size_t s = 0; s < kShards; ++s) {
        const std::size_t count = n_mc / kShards + (s < n_mc % kShards ? 1 : 0);
        ranges[s] = {off, count};
        off += count;
    }
    const auto run_shard = [&](std::size_t s) {
        const auto [shard_off, count] = ranges[s];
        if (count == 0)
            return;
        const std::vector<double> draws =
            sample_spreads(params, count, derive_seed(seed, 100 + s));
        std::copy(draws.begin(), draws.end(),
                  pooled.begin() + static_cast<std::ptrdiff_t>(shard_off));
    };
    if (n_threads <= 1) {
        for (std::size_t s = 0; s < kShards; ++s)
            run_shard(s);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(n_threads), kShards);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t s = next.fetch_add(1);
                    if (s >= kShards)
                        break;
                    run_shard(s);
                }
            });
        for (auto& th : pool)
            th.join();
    }
    return pooled;
}

// Type-7 quantile via two nth_element passes; v is scrambled.
double quantile_inplace(std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double vlo = v[lo];
    if (lo + 1 >= v.size())
        return vlo;
    const double vhi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    const double frac = pos - static_cast<double>(lo);
    return vlo + frac * (vhi - vlo);
}

QuantileEstimate quantile_with_bootstrap(const std::vector<double>& pooled, std::uint64_t seed) {
    const std::size_t n = pooled.size();
    QuantileEstimate est;
    {
        std::vector<double> copy = pooled;
        est.value = quantile_inplace(copy, 0.95);
    }
    std::vector<double> reps(kBootstrapReps);
    std::vector<double> work(n);
    for (std::size_t b = 0; b < kBootstrapReps; ++b) {
        std::mt19937_64 eng(derive_seed(seed, 777 + b));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t i = 0; i < n; ++i)
            work[i] = pooled[pick(eng)];
        reps[b] = quantile_inplace(work, 0.95);
    }
    const double m = stats::mean(reps);
    double acc = 0.0;
    for (double r : reps) {
        const double d = r - m;
        acc += d * d;
    }
    est.std_error = std::sqrt(acc / static_cast<double>(kBootstrapReps - 1));
    return est;
}

void check_mc_args(const SpreadDistParams& params, std::size_t n_mc, int n_threads) {
    params.validate();
    if (n_mc < 10000)
        throw invalid_input("spread_var95: n_mc must be >= 10000");
    if (n_threads < 1)
        throw invalid_input("spread_var95: n_threads must be >= 1");
}

} // namespace

double mid_volatility(std::span<const double> mids) {
    if (mids.size() < 2)
        throw invalid_input("mid_volatility: need at least two mid observations");
    return stats::population_std(mids);
}

double mid_var95_from_sigma(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw invalid_input("mid_var95_from_sigma: sigma must be finite and >= 0");
    return 1.65 * sigma;
}

QuantileEstimate spread_var95(const SpreadDistParams& params, std::size_t n_mc,
                              std::uint64_t seed, int n_threads) {
    check_mc_args(params, n_mc, n_threads);
    const std::vector<double> pooled = draw_pooled(params, n_mc, seed, n_threads);
    return quantile_with_bootstrap(pooled, seed);
}

std::string RiskReport::to_json() const {
    nlohmann::json j;
    j["mid_sigma"] = mid_sigma;
    j["mid_var95"] = mid_var95;
    j["spread_mean"] = spread_mean;
    j["spread_q95"] = spread_q95;
    j["spread_q95_se"] = spread_q95_se;
    j["n_observations"] = n_observations;
    j["n_mc"] = n_mc;
    j["spread_xi0"] = spread_params.xi0;
    j["spread_xi1"] = spread_params.xi1;
    j["spread_kappa0"] = spread_params.kappa0;
    j["spread_kappa1"] = spread_params.kappa1;
    return j.dump(2) + "\n";
}

std::string RiskReport::to_text() const {
    char buf[256];
    std::string out;
    out += "quantity   center        var95\n";
    std::snprintf(buf, sizeof(buf), "mid        %-12.6g  %-12.6g\n", mid_sigma, mid_var95);
    out += buf;
    std::snprintf(buf, sizeof(buf), "spread     %-12.6g  %-12.6g (se %.3g)\n", spread_mean,
                  spread_q95, spread_q95_se);
    out += buf;
    return out;
}

RiskReport make_risk_report(const ObservableSeries& observations, const SpreadDistParams& params,
                            std::size_t n_mc, std::uint64_t seed, int n_threads) {
    check_mc_args(params, n_mc, n_threads);
    const std::vector<double> pooled = draw_pooled(params, n_mc, seed, n_threads);
    const QuantileEstimate q = quantile_with_bootstrap(pooled, seed);

    RiskReport rep;
    rep.mid_sigma = mid_volatility(observations.mids);
    rep.mid_var95 = mid_var95_from_sigma(rep.mid_sigma);
    rep.spread_mean = stats::mean(pooled);
    rep.spread_q95 = q.value;
    rep.spread_q95_se = q.std_error;
    rep.n_observations = observations.size();
    rep.n_mc = n_mc;
    rep.spread_params = params;
    return rep;
}

} // namespace bidask
