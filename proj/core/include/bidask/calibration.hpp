#pragma once

#include "bidask/dynamics.hpp"
#include "bidask/spread_dist.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bidask {

struct FitOptions {
    bool fit_xi0 = false;  // xi0 stays fixed at 0 unless enabled
    int restarts = 4;      // optimizer restarts from distinct inits
    int max_iters = 2000;  // simplex iterations per restart
    double x_tol = 1e-6;
    double f_tol = 1e-7;
    int n_threads = 1;             // restarts run in parallel when > 1
    std::size_t min_samples = 100; // refuse smaller datasets

    void validate() const;
};

// Maximum-likelihood fit of the spread distribution. Offsets enter the
// likelihood only through their squares, so the optimizer works
// unconstrained and the reported offsets are canonicalized to |offset|;
// when the coupling offset is consistent with zero, the xi1 <-> kappa1
// relabelling leaves the distribution invariant and the equivalent twin
// parameter set is reported alongside.
struct FitResult {
    SpreadDistParams params;
    double neg_log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0; // summed over restarts
    std::size_t n_samples = 0;

    // Asymptotic standard errors (xi0, xi1, kappa0, kappa1) from the
    // inverse observed information; absent when the Hessian is not
    // positive definite. Entries for fixed parameters are NaN.
    std::optional<std::array<double, 4>> std_errors;

    bool offset_symmetric = false;
    std::optional<SpreadDistParams> symmetric_twin;

    // Flat key-value JSON (sorted keys, round-trip doubles).
    std::string to_json() const;
};

// Raised when no optimizer restart reaches its tolerances; carries the
// best point found so callers can inspect or relax.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, FitResult best)
        : std::runtime_error(what), best_(std::move(best)) {}

    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

// Exact negative log likelihood: -sum log pdf(sample_i). Requires a
// nonempty sample of finite positive spreads; returns +inf when any
// sample falls where the density vanishes (e.g. inside a folded gap).
double negative_log_likelihood(const SpreadDistParams& params, std::span<const double> samples);

// Fits (xi1, kappa0, kappa1) — optionally xi0 — by simplex descent in
// (log xi1, kappa0, log kappa1) on an interpolated log-density surrogate
// (exact angular quadrature on a 1025-node grid, cubic interpolation
// between nodes), then reports the exact likelihood at the optimum.
// Scale lower bounds 1e-6 * median(sample) keep the search off the
// degenerate axes. Throws invalid_input for undersized or non-positive
// samples, convergence_error when every restart exhausts max_iters.
FitResult fit_spread_params(std::span<const double> samples, const FitOptions& options = {});

struct PhaseScaleOptions {
    std::size_t n_trajectories = 250;
    std::size_t n_steps = 1300;
    std::size_t n_bins = 16;
    std::size_t burn_in = 0;
    double mid0 = 1.0;
    std::uint64_t seed = 1;
};

struct PhaseScaleResult {
    double best_scale = 0.0;
    // (candidate, chi-squared against the target histogram), input order.
    std::vector<std::pair<double, double>> scores;
};

// Scores each candidate phase scale by regenerating the pole-started
// ensemble histogram with rho = mid0 * dt / scale and comparing bin
// fractions to the target by chi-squared distance; the same seed is used
// for every candidate so the comparison rides on common random numbers.
// The target histogram must use n_bins bins. Requires positive candidates.
PhaseScaleResult fit_phase_scale(const PopulationHistogram& target, const ModelParams& base,
                                 std::span<const double> candidates,
                                 const PhaseScaleOptions& options = {});

} // namespace bidask
