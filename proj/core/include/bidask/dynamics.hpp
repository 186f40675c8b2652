#pragma once

#include "bidask/model.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bidask {

// Two-component amplitude over the instantaneous (ask, bid) eigenbasis.
// |psi_ask|^2 is the probability of finding the system at the ask price.
struct AmplitudeState {
    std::complex<double> psi_ask{1.0, 0.0};
    std::complex<double> psi_bid{0.0, 0.0};

    double norm_sq() const;
    double population_ask() const;
    double population_bid() const;

    // Throws invalid_state when |norm^2 - 1| > 1e-6.
    void require_normalized() const;
};

// One exact-unitary step of the two-level Schrodinger evolution generated
// by the (frozen-within-step) price operator:
//     psi <- exp(-i S tau) psi,   tau = dt / rho.
// Closed form via the Rabi decomposition: with c = (s11+s22)/2,
// g = (s11-s22)/2 and r = sqrt(g^2 + |s12|^2),
//     exp(-i S tau) = e^{-i c tau} [cos(r tau) I - i sin(r tau)/r *
//                                   (g sigma_z + Re s12 sigma_x - Im s12 sigma_y)]
// and the identity when r = 0. When renormalize is set (the default) the
// state is rescaled to unit norm after the step, absorbing the last-ulp
// drift of the closed form. Input must be normalized within 1e-6.
AmplitudeState step_amplitudes(const AmplitudeState& state, const PriceOperator2x2& op,
                               double dt, double rho, bool renormalize = true);

// A simulated stochastic trajectory: per step the post-step time, mid
// price, realized spread, and the ask population.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> mids;
    std::vector<double> spreads;
    std::vector<double> populations_ask;

    std::size_t size() const { return times.size(); }

    // CSV with header "step,time,mid,spread,pop_ask", steps numbered from 1.
    std::string to_csv() const;
};

// Reads back the CSV written by Trajectory::to_csv. Schema errors raise
// data_error with source:line context; populations must lie in [0,1].
Trajectory load_trajectory_csv(std::istream& in, const std::string& source);
Trajectory load_trajectory_csv_file(const std::string& path);

// Runs n_steps of the coupled mid/operator/amplitude recursion from the
// given initial state and initial mid price. Shock streams are derived
// from the seed (z, u, v independent); the same seed reproduces the same
// trajectory bit for bit. Requires n_steps >= 1 and a normalized state.
Trajectory simulate_trajectory(const AmplitudeState& init, const ModelParams& params,
                               std::size_t n_steps, std::uint64_t seed, double mid0 = 1.0);

// Dynamics time constant for a target dimensionless phase-per-step
// phase_scale = mean_price * dt / rho.
double rho_from_phase_scale(double mean_price, double dt, double phase_scale);

// Default burn-in: ten coupling-driven oscillation periods (population
// period 2 pi rho / (kappa0 dt) steps), or 1000 steps when kappa0 == 0.
std::size_t default_burn_in(const ModelParams& params);

// Equal-width histogram of the ask population over [0, 1].
struct PopulationHistogram {
    std::vector<double> edges;          // n_bins + 1 ascending edges
    std::vector<std::uint64_t> counts;  // n_bins
    std::uint64_t total = 0;

    std::vector<double> fractions() const;
};

// Bins populations_ask[burn_in..] into n_bins equal bins. Requires
// n_bins >= 2 and burn_in < trajectory size.
PopulationHistogram population_histogram(const Trajectory& traj, std::size_t burn_in,
                                         std::size_t n_bins);

// Aggregated population histogram over an ensemble of independent
// trajectories, each n_steps long and started from the pure-ask state at
// mid0. Trajectory i runs on the seed stream derive_seed(seed, i); counts
// from all trajectories past burn_in are merged, so the result is
// deterministic for a fixed seed. The short-run ensemble resolves how far
// the population has mixed away from the pole, which is what
// phase-scale calibration scores.
PopulationHistogram ensemble_population_histogram(const ModelParams& params,
                                                  std::size_t n_trajectories,
                                                  std::size_t n_steps, std::size_t n_bins,
                                                  std::size_t burn_in, std::uint64_t seed,
                                                  double mid0 = 1.0);

// Stationary density of the population under fast phase randomization:
// the arcsine law transported to [pmin, pmax],
//     f(p) = 1 / (pi sqrt((pmax - p)(p - pmin))).
// Requires pmin < p < pmax.
double theoretical_population_pdf(double p, double pmin, double pmax);

// Independent statistical check of the arcsine prediction: N_bid and
// N_ask drawn i.i.d. Gamma(1/2, theta) make p = N_bid / (N_bid + N_ask)
// exactly Beta(1/2, 1/2) distributed, independent of theta. Draws n pairs
// and runs a KS test at the 1% level.
struct GammaRatioReport {
    double theta = 0.0;
    std::size_t n = 0;
    double ks = 0.0;
    double critical_1pct = 0.0;
    bool pass = false;
};

// Requires theta > 0 and n >= 1000.
GammaRatioReport gamma_ratio_check(double theta, std::size_t n, std::uint64_t seed);

} // namespace bidask
