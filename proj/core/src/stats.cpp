#include "bidask/stats.hpp"

#include "bidask/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bidask::stats {

double normal_log_density(double x, double mu, double sd) {
    if (!(sd > 0.0) || !std::isfinite(x) || !std::isfinite(mu) || !std::isfinite(sd))
        throw invalid_input("normal_log_density: sd must be positive and arguments finite");
    const double t = (x - mu) / sd;
    return -0.5 * t * t - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double arcsine_cdf(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw invalid_input("arcsine_cdf: argument must lie in [0,1]");
    return (2.0 / std::numbers::pi) * std::asin(std::sqrt(p));
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    if (sorted.empty())
        throw invalid_input("ks_distance: empty sample");
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw invalid_input("ks_distance: sample must be sorted ascending");
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double ks_critical_value(std::size_t n, double alpha) {
    if (n == 0)
        throw invalid_input("ks_critical_value: n must be positive");
    // K_alpha solves Q(K) = alpha for the Kolmogorov distribution.
    double k;
    if (alpha == 0.01)
        k = 1.6276236115189503;
    else if (alpha == 0.05)
        k = 1.3580986393225506;
    else
        throw invalid_input("ks_critical_value: alpha must be 0.01 or 0.05");
    return k / std::sqrt(static_cast<double>(n));
}

double empirical_quantile(std::span<const double> values, double q) {
    if (values.empty())
        throw invalid_input("empirical_quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw invalid_input("empirical_quantile: q must lie in [0,1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size())
        return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double mean(std::span<const double> values) {
    if (values.empty())
        throw invalid_input("mean: empty sample");
    double s = 0.0;
    for (double x : values)
        s += x;
    return s / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    if (values.size() < 2)
        throw invalid_input("population_std: need at least two observations");
    const double m = mean(values);
    double s = 0.0;
    for (double x : values) {
        const double d = x - m;
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(values.size()));
}

double chi_squared_distance(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw invalid_input("chi_squared_distance: size mismatch or empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = std::max(expected[i], 1e-9);
        const double d = observed[i] - expected[i];
        acc += d * d / e;
    }
    return acc;
}

} // namespace bidask::stats
