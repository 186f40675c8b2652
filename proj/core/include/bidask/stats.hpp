#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bidask::stats {

// log of the normal density with mean mu and standard deviation sd (sd > 0).
double normal_log_density(double x, double mu, double sd);

// CDF of the arcsine (Beta(1/2,1/2)) law on [0,1]: (2/pi) asin(sqrt(p)).
// Throws invalid_input outside [0,1].
double arcsine_cdf(double p);

// Two-sided Kolmogorov-Smirnov sup distance between the empirical CDF of
// `sorted` (ascending) and the model CDF `cdf`. Throws on empty input or
// unsorted data.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

// Large-sample KS critical value K_alpha / sqrt(n) for alpha in {0.01, 0.05}.
double ks_critical_value(std::size_t n, double alpha);

// Linear-interpolation empirical quantile (the common "type 7" estimator),
// q in [0,1]. Sorts a copy; throws on empty input or q outside [0,1].
double empirical_quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

// Population standard deviation (1/N normalization).
double population_std(std::span<const double> values);

// Pearson chi-squared distance sum (o_i - e_i)^2 / e_i between two equal
// length nonnegative vectors; entries where e_i == 0 use a small floor so a
// zero-model bin with observed mass is penalized rather than divided by zero.
double chi_squared_distance(std::span<const double> observed, std::span<const double> expected);

} // namespace bidask::stats
