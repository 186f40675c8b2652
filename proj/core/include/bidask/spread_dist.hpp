#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bidask {

// Parameters of the stationary spread distribution. The spread is
// Delta = sqrt(X^2 + Y^2) with independent X ~ N(xi0, xi1^2) and
// Y ~ N(kappa0, kappa1^2); offsets and scales are nonnegative.
struct SpreadDistParams {
    double xi0 = 0.0;
    double xi1 = 0.0;
    double kappa0 = 0.0;
    double kappa1 = 0.0;

    // Throws invalid_input unless all fields are finite and >= 0.
    void validate() const;

    // Both fluctuation scales zero: the spread is deterministic. Sampling
    // supports this; the density evaluators reject it.
    bool is_point_mass() const { return xi1 == 0.0 && kappa1 == 0.0; }

    double point_mass_location() const;
};

// Closed-form density for the zero-offset case (xi0 = kappa0 = 0):
//     P(d) = d / (xi1 kappa1) * exp(-a d^2) * I0(b d^2)
//     a = (1/xi1^2 + 1/kappa1^2) / 4,   b = |1/xi1^2 - 1/kappa1^2| / 4.
// Evaluated in log space so extreme scale ratios cannot overflow. With
// xi1 == kappa1 this is the Rayleigh density d/xi1^2 exp(-d^2/(2 xi1^2)).
// Requires d >= 0 and positive scales.
double spread_pdf_zero_mean(double delta, double xi1, double kappa1);

// log of the general density, computed from the angular integral
//     P(d) = d * Int_0^{2pi} n(d cos t; xi0, xi1) n(d sin t; kappa0, kappa1) dt
// by midpoint quadrature in log-sum-exp form, with the node count adapted
// to d / min(xi1, kappa1). When exactly one scale is zero the integral
// collapses to the folded-normal form
//     P(d) = d / s * [n(s; m, w) + n(-s; m, w)],   s = sqrt(d^2 - c^2),
// where c is the frozen component's offset; the density is then zero below
// d = c and has an integrable singularity at d = c. Point-mass parameters
// are rejected with invalid_input. Returns -inf where the density is zero.
double spread_logpdf_general(double delta, const SpreadDistParams& params);

// exp(spread_logpdf_general).
double spread_pdf_general(double delta, const SpreadDistParams& params);

// n independent draws of sqrt((xi0 + xi1 u)^2 + (kappa0 + kappa1 v)^2)
// with u, v standard normal. Deterministic for a fixed seed; the two
// component streams are derived from the seed exactly like a trajectory's
// gap/coupling shocks. Requires n >= 1.
std::vector<double> sample_spreads(const SpreadDistParams& params, std::size_t n, std::uint64_t seed);

// Tabulated density on an ascending grid from zero.
struct PdfCurve {
    std::vector<double> spread;
    std::vector<double> density;

    // Two-column CSV, header "spread,density", full round-trip precision.
    std::string to_csv() const;
};

// Density tabulated on n_points equally spaced nodes covering
// [0, mean + 8 std] of the distribution, with the moments estimated from a
// fixed-seed internal Monte Carlo draw (output is fully deterministic).
// Requires n_points >= 16 and a non-point-mass distribution.
PdfCurve pdf_curve(const SpreadDistParams& params, std::size_t n_points);

} // namespace bidask
