#include "bidask/bessel.hpp"

#include "bidask/errors.hpp"

#include <cmath>
#include <numbers>

namespace bidask {

namespace {

// Power series: I0(x) = sum_k (x^2/4)^k / (k!)^2, summed by term recursion.
// For x <= 700 the sum peaks below ~3e302, safely inside double range, so
// no rescaling is needed before taking the log.
double log_i0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 4000; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (term < sum * 1e-18 && static_cast<double>(k) * static_cast<double>(k) > q)
            break;
    }
    return std::log(sum);
}

// Asymptotic tail: correction series in 1/(8x) with coefficients
// prod (2j-1)^2 / (k! 8^k); six terms give ~1e-15 relative accuracy at the
// branch point x = 700 and improve from there.
double log_i0_asymptotic(double x) {
    const double r = 1.0 / (8.0 * x);
    double corr = 1.0;
    double term = 1.0;
    for (int k = 1; k <= 6; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd * r / static_cast<double>(k);
        corr += term;
    }
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log1p(corr - 1.0);
}

} // namespace

double log_bessel_i0(double x) {
    if (std::isnan(x) || x < 0.0)
        throw invalid_input("log_bessel_i0: argument must be >= 0");
    if (x == 0.0)
        return 0.0;
    if (x <= 700.0)
        return log_i0_series(x);
    return log_i0_asymptotic(x);
}

} // namespace bidask
