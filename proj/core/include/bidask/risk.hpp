#pragma once

#include "bidask/market_data.hpp"
#include "bidask/spread_dist.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace bidask {

struct QuantileEstimate {
    double value = 0.0;
    double std_error = 0.0; // bootstrap standard error
};

// Population (1/N) standard deviation of the mid series; needs >= 2 points.
double mid_volatility(std::span<const double> mids);

// 95% value-at-risk of the mid under the Gaussian step model: exactly
// 1.65 * sigma (the conventional one-sided 95% multiplier).
double mid_var95_from_sigma(double sigma);

// Monte Carlo 95th percentile of the spread distribution with a
// 100-replicate bootstrap standard error. Draws are generated in 16 fixed
// shards (threads only split the shards), so the estimate depends on
// (params, n_mc, seed) alone. Requires n_mc >= 10000.
QuantileEstimate spread_var95(const SpreadDistParams& params, std::size_t n_mc,
                              std::uint64_t seed, int n_threads = 1);

struct RiskReport {
    double mid_sigma = 0.0;
    double mid_var95 = 0.0;
    double spread_mean = 0.0;
    double spread_q95 = 0.0;
    double spread_q95_se = 0.0;
    std::size_t n_observations = 0;
    std::size_t n_mc = 0;
    SpreadDistParams spread_params;

    // Flat key-value JSON, sorted keys.
    std::string to_json() const;

    // Two-row text table: mid (sigma, 1.65 sigma) and spread
    // (Monte Carlo mean, q95 +/- se).
    std::string to_text() const;
};

// Combines observed mid volatility with the fitted spread distribution:
// sigma and VaR from the observable series, spread mean/quantile from a
// fresh Monte Carlo draw of the given parameters.
RiskReport make_risk_report(const ObservableSeries& observations, const SpreadDistParams& params,
                            std::size_t n_mc, std::uint64_t seed, int n_threads = 1);

} // namespace bidask
