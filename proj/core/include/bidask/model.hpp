#pragma once

#include <complex>

namespace bidask {

// 2x2 Hermitian price operator
//     [ s11   s12 ]
//     [ s12*  s22 ]
// with real diagonal; only the upper off-diagonal entry is stored.
struct PriceOperator2x2 {
    double s11 = 0.0;
    double s22 = 0.0;
    std::complex<double> s12{0.0, 0.0};

    // Throws invalid_input on non-finite entries.
    void validate() const;
};

// The two eigenvalues of the price operator interpreted as market prices:
// ask is the larger root, bid the smaller, mid their average and
// spread = ask - bid >= 0.
struct EigenPrices {
    double ask = 0.0;
    double bid = 0.0;
    double mid = 0.0;
    double spread = 0.0;
};

// Parameters of the stochastic price operator. All sigmas/scales are
// standard deviations per step of the corresponding Gaussian shocks; xi0
// and kappa0 are the deterministic offsets of the diagonal-gap and
// off-diagonal processes; rho is the amplitude-dynamics time constant and
// dt the step length.
struct ModelParams {
    double sigma = 0.0;   // common (mid) shock scale
    double xi0 = 0.0;     // diagonal-gap offset
    double xi1 = 0.0;     // diagonal-gap shock scale
    double kappa0 = 0.0;  // coupling offset
    double kappa1 = 0.0;  // coupling shock scale
    double rho = 1.0;     // dynamics time constant, > 0
    double dt = 1.0;      // step length, > 0

    // Throws invalid_input unless all fields are finite, the shock scales
    // and offsets are >= 0, and rho and dt are > 0.
    void validate() const;
};

// One step's standard-normal draws: dz drives the common price level,
// du the diagonal gap, dv the coupling.
struct Shocks {
    double dz = 0.0;
    double du = 0.0;
    double dv = 0.0;
};

// Closed-form eigenvalue prices of a validated operator:
//     r    = sqrt(((s11 - s22)/2)^2 + |s12|^2)
//     ask  = (s11 + s22)/2 + r,  bid = (s11 + s22)/2 - r.
EigenPrices eigen_prices(const PriceOperator2x2& op);

// Advances the common price level: mid_prev + sigma * sqrt(dt) * dz.
double step_mid(double mid_prev, double sigma, double dz, double dt);

// Assembles the stochastic operator around the previous mid:
//     xi  = xi0 + xi1 * du         (diagonal gap)
//     k   = kappa0 + kappa1 * dv   (coupling)
//     s11 = common + xi/2, s22 = common - xi/2, s12 = k/2
// where common = step_mid(mid_prev, ...). The off-diagonal entry is real.
PriceOperator2x2 build_operator(double mid_prev, const ModelParams& params, const Shocks& shocks);

// Spread implied by one pair of gap/coupling draws:
//     sqrt((xi0 + xi1 du)^2 + (kappa0 + kappa1 dv)^2),
// identical to eigen_prices(build_operator(...)).spread.
double spread_realization(const ModelParams& params, double du, double dv);

} // namespace bidask
