#include "bidask/calibration.hpp"

#include "bidask/errors.hpp"
#include "bidask/nelder_mead.hpp"
#include "bidask/spread_dist.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <vector>

using namespace bidask;

TEST_CASE("simplex optimizer") {
    using vec = std::vector<double>;
    SUBCASE("separable quadratic") {
        const auto f = [](std::span<const double> x) {
            return (x[0] - 1.5) * (x[0] - 1.5) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5);
        };
        const auto r = optim::nelder_mead(f, vec{0.0, 0.0}, vec{0.5, 0.5});
        CHECK(r.converged);
        CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-4));
        CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-4));
        CHECK(r.fx < 1e-8);
    }
    SUBCASE("Rosenbrock valley") {
        const auto f = [](std::span<const double> x) {
            const double a = 1.0 - x[0];
            const double b = x[1] - x[0] * x[0];
            return a * a + 100.0 * b * b;
        };
        optim::NelderMeadOptions opt;
        opt.max_iters = 5000;
        const auto r = optim::nelder_mead(f, vec{-1.2, 1.0}, vec{0.4, 0.4}, opt);
        CHECK(r.converged);
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(r.x[1] == doctest::Approx(1.0).epsilon(2e-3));
    }
    SUBCASE("iteration cap reported as non-convergence") {
        const auto f = [](std::span<const double> x) { return x[0] * x[0]; };
        optim::NelderMeadOptions opt;
        opt.max_iters = 3;
        const auto r = optim::nelder_mead(f, vec{5.0}, vec{1.0}, opt);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 3);
    }
    SUBCASE("argument checking") {
        const auto f = [](std::span<const double> x) { return x[0]; };
        CHECK_THROWS_AS(optim::nelder_mead(f, vec{}, vec{}), invalid_input);
        CHECK_THROWS_AS(optim::nelder_mead(f, vec{0.0}, vec{0.0}), invalid_input);
        optim::NelderMeadOptions bad;
        bad.max_iters = 0;
        CHECK_THROWS_AS(optim::nelder_mead(f, vec{0.0}, vec{1.0}, bad), invalid_input);
    }
}

TEST_CASE("exact negative log likelihood") {
    SpreadDistParams unit{0.0, 1.0, 0.0, 1.0}; // Rayleigh(1)
    SUBCASE("single-sample closed form") {
        // -log pdf(1) = -log(1 * e^{-1/2}) = 1/2
        const std::vector<double> one{1.0};
        CHECK(negative_log_likelihood(unit, one) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("sums over samples") {
        const std::vector<double> two{1.0, 2.0};
        // -log(2 e^{-2}) = 2 - log 2
        CHECK(negative_log_likelihood(unit, two) ==
              doctest::Approx(0.5 + 2.0 - std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("vanishing density gives +inf") {
        SpreadDistParams gap{2.0, 0.0, 0.0, 1.0}; // support starts at 2
        const std::vector<double> below{1.0};
        CHECK(negative_log_likelihood(gap, below) ==
              std::numeric_limits<double>::infinity());
    }
    SUBCASE("true parameters score better than distorted ones") {
        const auto sample = sample_spreads(unit, 20000, 4);
        const double at_truth = negative_log_likelihood(unit, sample);
        CHECK(at_truth < negative_log_likelihood({0.0, 1.6, 0.0, 1.6}, sample));
        CHECK(at_truth < negative_log_likelihood({0.0, 0.6, 0.0, 0.6}, sample));
        CHECK(at_truth < negative_log_likelihood({0.0, 1.0, 0.8, 1.0}, sample));
    }
    SUBCASE("argument checking") {
        CHECK_THROWS_AS(negative_log_likelihood(unit, std::vector<double>{}), invalid_input);
        const std::vector<double> bad{1.0, -0.5};
        CHECK_THROWS_WITH_AS(negative_log_likelihood(unit, bad), doctest::Contains("index 1"),
                             invalid_input);
        const std::vector<double> zero{0.0};
        CHECK_THROWS_AS(negative_log_likelihood(unit, zero), invalid_input);
    }
}

TEST_CASE("fit recovers Rayleigh scales") {
    SpreadDistParams truth{0.0, 0.8, 0.0, 0.8};
    const auto sample = sample_spreads(truth, 30000, 11);
    FitOptions opt;
    opt.n_threads = 2;
    const FitResult fit = fit_spread_params(sample, opt);
    CHECK(fit.converged);
    CHECK(fit.n_samples == 30000);
    // equal-scale zero-offset target: both scales within 5%, offset near 0
    CHECK(fit.params.xi1 == doctest::Approx(0.8).epsilon(0.05));
    CHECK(fit.params.kappa1 == doctest::Approx(0.8).epsilon(0.05));
    CHECK(fit.params.kappa0 < 0.1);
    CHECK(fit.params.xi0 == 0.0); // fixed by default
    // detected the relabelling symmetry
    CHECK(fit.offset_symmetric);
    REQUIRE(fit.symmetric_twin.has_value());
    CHECK(fit.symmetric_twin->xi1 == fit.params.kappa1);
    CHECK(fit.symmetric_twin->kappa1 == fit.params.xi1);
    // canonical order: xi1 <= kappa1 in the symmetric case
    CHECK(fit.params.xi1 <= fit.params.kappa1);

    // likelihood at the fit beats the generator's own parameters
    CHECK(fit.neg_log_likelihood <= negative_log_likelihood(truth, sample) + 1e-6);
}

TEST_CASE("fit recovers an offset coupling") {
    // tick-size magnitudes, coupling offset well separated from zero
    SpreadDistParams truth{0.0, 0.42e-3, 0.55e-3, 0.07e-3};
    const auto sample = sample_spreads(truth, 30000, 21);
    FitOptions opt;
    opt.n_threads = 4;
    const FitResult fit = fit_spread_params(sample, opt);
    CHECK(fit.converged);
    CHECK(fit.params.xi1 == doctest::Approx(truth.xi1).epsilon(0.05));
    CHECK(fit.params.kappa0 == doctest::Approx(truth.kappa0).epsilon(0.05));
    CHECK(fit.params.kappa1 == doctest::Approx(truth.kappa1).epsilon(0.10));
    CHECK_FALSE(fit.offset_symmetric);
    CHECK_FALSE(fit.symmetric_twin.has_value());

    REQUIRE(fit.std_errors.has_value());
    const auto& se = *fit.std_errors;
    CHECK(std::isnan(se[0])); // xi0 fixed
    CHECK(se[1] > 0.0);
    CHECK(se[2] > 0.0);
    CHECK(se[3] > 0.0);
    // standard errors are small relative to the recovered values
    CHECK(se[1] < 0.2 * fit.params.xi1);
    CHECK(se[2] < 0.2 * fit.params.kappa0);

    SUBCASE("JSON report carries the fit") {
        const auto j = nlohmann::json::parse(fit.to_json());
        CHECK(j.at("xi1").get<double>() == fit.params.xi1);
        CHECK(j.at("kappa0").get<double>() == fit.params.kappa0);
        CHECK(j.at("converged").get<bool>());
        CHECK(j.at("n_samples").get<std::size_t>() == 30000);
        CHECK(j.at("stderr_kappa0").get<double>() == (*fit.std_errors)[2]);
        CHECK_FALSE(j.contains("twin_xi1"));
    }
}

TEST_CASE("fit is scale equivariant and deterministic") {
    SpreadDistParams truth{0.0, 0.32e-3, 0.48e-3, 0.27e-3};
    auto sample = sample_spreads(truth, 20000, 33);
    const FitResult base = fit_spread_params(sample, {});

    // same data, same options: bitwise identical result
    const FitResult again = fit_spread_params(sample, {});
    CHECK(base.params.xi1 == again.params.xi1);
    CHECK(base.params.kappa0 == again.params.kappa0);
    CHECK(base.params.kappa1 == again.params.kappa1);
    CHECK(base.neg_log_likelihood == again.neg_log_likelihood);

    // multiplying every sample by c multiplies every fitted parameter by c
    const double c = 3.7;
    std::vector<double> scaled(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) scaled[i] = c * sample[i];
    const FitResult big = fit_spread_params(scaled, {});
    CHECK(big.params.xi1 == doctest::Approx(c * base.params.xi1).epsilon(0.01));
    CHECK(big.params.kappa0 == doctest::Approx(c * base.params.kappa0).epsilon(0.01));
    CHECK(big.params.kappa1 == doctest::Approx(c * base.params.kappa1).epsilon(0.01));
}

TEST_CASE("fit input policing") {
    SpreadDistParams truth{0.0, 1.0, 0.0, 1.0};
    const auto small = sample_spreads(truth, 40, 1);
    CHECK_THROWS_WITH_AS(fit_spread_params(small, {}),
                         doctest::Contains("needs at least 100 samples, got 40"),
                         invalid_input);

    FitOptions lenient;
    lenient.min_samples = 10;
    CHECK_NOTHROW(fit_spread_params(sample_spreads(truth, 200, 2), lenient));

    auto sample = sample_spreads(truth, 200, 3);
    sample[5] = -1.0;
    CHECK_THROWS_AS(fit_spread_params(sample, {}), invalid_input);

    FitOptions bad;
    bad.restarts = 0;
    CHECK_THROWS_AS(fit_spread_params(sample_spreads(truth, 200, 4), bad), invalid_input);
    bad = {};
    bad.n_threads = 0;
    CHECK_THROWS_AS(fit_spread_params(sample_spreads(truth, 200, 4), bad), invalid_input);
}

TEST_CASE("starved optimizer raises convergence_error with its best point") {
    SpreadDistParams truth{0.0, 1.0, 0.0, 1.0};
    const auto sample = sample_spreads(truth, 500, 8);
    FitOptions opt;
    opt.max_iters = 2; // cannot possibly converge
    try {
        fit_spread_params(sample, opt);
        FAIL("expected convergence_error");
    } catch (const convergence_error& e) {
        CHECK_FALSE(e.best().converged);
        CHECK(e.best().n_samples == 500);
        CHECK(e.best().params.xi1 > 0.0);
        CHECK(std::isfinite(e.best().neg_log_likelihood));
    }
}

TEST_CASE("phase-scale scoring") {
    ModelParams base;
    base.sigma = 0.0;
    base.xi0 = 0.0;
    base.xi1 = 2.5e-3;
    base.kappa0 = 0.02;
    base.kappa1 = 5e-3;
    base.dt = 1.0;

    PhaseScaleOptions opt;
    opt.n_trajectories = 120;
    opt.n_steps = 800;
    opt.seed = 5;

    SUBCASE("single candidate is always chosen and scored") {
        ModelParams gen = base;
        gen.rho = rho_from_phase_scale(opt.mid0, base.dt, 10.0);
        const PopulationHistogram target = ensemble_population_histogram(
            gen, opt.n_trajectories, opt.n_steps, opt.n_bins, opt.burn_in, 77, opt.mid0);
        const std::vector<double> cands{10.0};
        const PhaseScaleResult r = fit_phase_scale(target, base, cands, opt);
        CHECK(r.best_scale == 10.0);
        REQUIRE(r.scores.size() == 1);
        CHECK(r.scores[0].first == 10.0);
        CHECK(r.scores[0].second >= 0.0);
    }

    SUBCASE("recovers the generating scale from a ladder") {
        ModelParams gen = base;
        gen.rho = rho_from_phase_scale(opt.mid0, base.dt, 20.0);
        const PopulationHistogram target = ensemble_population_histogram(
            gen, opt.n_trajectories, opt.n_steps, opt.n_bins, opt.burn_in, 99, opt.mid0);
        const std::vector<double> cands{5.0, 10.0, 20.0, 40.0};
        const PhaseScaleResult r = fit_phase_scale(target, base, cands, opt);
        CHECK(r.best_scale == 20.0);
        REQUIRE(r.scores.size() == 4);
        // the winner's score is strictly the smallest
        for (const auto& [cand, score] : r.scores) {
            if (cand != 20.0) CHECK(score > r.scores[2].second);
        }
    }

    SUBCASE("argument checking") {
        const PopulationHistogram target = ensemble_population_histogram(
            base, 10, 50, opt.n_bins, 0, 1, opt.mid0);
        CHECK_THROWS_AS(fit_phase_scale(target, base, std::vector<double>{}, opt),
                        invalid_input);
        CHECK_THROWS_AS(fit_phase_scale(target, base, std::vector<double>{-1.0}, opt),
                        invalid_input);
        PhaseScaleOptions mismatched = opt;
        mismatched.n_bins = 8; // target was built with 16
        CHECK_THROWS_AS(fit_phase_scale(target, base, std::vector<double>{10.0}, mismatched),
                        invalid_input);
    }
}
