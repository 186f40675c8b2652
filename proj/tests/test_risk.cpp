#include "bidask/risk.hpp"

#include "bidask/errors.hpp"
#include "bidask/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <vector>

using namespace bidask;
using namespace testsupport;

TEST_CASE("mid volatility is the 1/N estimator") {
    const std::vector<double> mids{1.0, 2.0, 3.0, 4.0};
    // population variance of {1,2,3,4} is 1.25
    CHECK(mid_volatility(mids) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));

    const std::vector<double> pair{10.0, 11.0};
    CHECK(mid_volatility(pair) == doctest::Approx(0.5).epsilon(1e-15));

    // translation invariant, scale equivariant
    const std::vector<double> shifted{101.0, 102.0, 103.0, 104.0};
    CHECK(mid_volatility(shifted) == doctest::Approx(mid_volatility(mids)).epsilon(1e-12));
    const std::vector<double> scaled{3.0, 6.0, 9.0, 12.0};
    CHECK(mid_volatility(scaled) == doctest::Approx(3.0 * mid_volatility(mids)).epsilon(1e-12));

    CHECK_THROWS_AS(mid_volatility(std::vector<double>{1.0}), invalid_input);
    CHECK_THROWS_AS(mid_volatility(std::vector<double>{}), invalid_input);
    CHECK_THROWS_AS(mid_volatility(std::vector<double>{1.0, std::nan("")}), invalid_input);

    // consistency on a large Gaussian sample: sd 2 within 2%
    NormalStream z(55);
    std::vector<double> draws(100000);
    for (auto& d : draws) d = 2.0 * z();
    CHECK(mid_volatility(draws) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("mid VaR multiplier") {
    CHECK(mid_var95_from_sigma(1.0) == 1.65);
    CHECK(mid_var95_from_sigma(0.02) == doctest::Approx(0.033).epsilon(1e-15));
    CHECK(mid_var95_from_sigma(0.0) == 0.0);
    CHECK_THROWS_AS(mid_var95_from_sigma(-0.1), invalid_input);
    CHECK_THROWS_AS(mid_var95_from_sigma(std::nan("")), invalid_input);
}

TEST_CASE("spread VaR against closed-form quantiles") {
    SUBCASE("Rayleigh 95th percentile") {
        const double s = 0.4;
        const SpreadDistParams p{0.0, s, 0.0, s};
        const QuantileEstimate q = spread_var95(p, 100000, 7);
        CHECK(q.value == doctest::Approx(s * kRayleighQ95).epsilon(0.01));
        CHECK(q.std_error > 0.0);
        CHECK(q.std_error < 0.02 * q.value);
    }
    SUBCASE("point mass is exact with zero error") {
        const SpreadDistParams p{3.0, 0.0, 4.0, 0.0};
        const QuantileEstimate q = spread_var95(p, 10000, 1);
        CHECK(q.value == 5.0);
        CHECK(q.std_error == 0.0);
    }
    SUBCASE("general parameters against the quadrature CDF") {
        const SpreadDistParams p{0.0, 0.26e-3, 0.32e-3, 0.016e-3};
        SpreadCdfTable table(p, 2.5e-3);
        const QuantileEstimate q = spread_var95(p, 200000, 3);
        CHECK(q.value == doctest::Approx(table.quantile(0.95)).epsilon(0.01));
    }
    SUBCASE("deterministic in seed and thread count") {
        const SpreadDistParams p{0.0, 0.3, 0.2, 0.1};
        const QuantileEstimate a = spread_var95(p, 50000, 9, 1);
        const QuantileEstimate b = spread_var95(p, 50000, 9, 4);
        CHECK(a.value == b.value);
        CHECK(a.std_error == b.std_error);
        const QuantileEstimate c = spread_var95(p, 50000, 10, 1);
        CHECK(a.value != c.value);
    }
    SUBCASE("estimate tightens as n_mc grows") {
        const SpreadDistParams p{0.0, 0.4, 0.0, 0.4};
        const QuantileEstimate small = spread_var95(p, 20000, 4);
        const QuantileEstimate large = spread_var95(p, 320000, 4);
        CHECK(large.std_error < small.std_error);
        // both agree within a few joint standard errors
        const double gap = std::abs(large.value - small.value);
        CHECK(gap < 4.0 * (small.std_error + large.std_error));
    }
    SUBCASE("argument checking") {
        const SpreadDistParams p{0.0, 1.0, 0.0, 1.0};
        CHECK_THROWS_AS(spread_var95(p, 5000, 1), invalid_input);
        CHECK_THROWS_AS(spread_var95(p, 50000, 1, 0), invalid_input);
        SpreadDistParams bad{0.0, -1.0, 0.0, 1.0};
        CHECK_THROWS_AS(spread_var95(bad, 50000, 1), invalid_input);
    }
}

TEST_CASE("composed risk report") {
    ObservableSeries obs;
    obs.mids = {100.0, 101.0, 100.5, 99.5, 100.2};
    obs.rel_spreads = {0.01, 0.012, 0.011, 0.009, 0.010};
    const SpreadDistParams params{0.0, 0.26e-3, 0.32e-3, 0.016e-3};

    const RiskReport rep = make_risk_report(obs, params, 50000, 13, 2);
    CHECK(rep.mid_sigma == doctest::Approx(mid_volatility(obs.mids)).epsilon(1e-15));
    CHECK(rep.mid_var95 == 1.65 * rep.mid_sigma); // exact by construction
    CHECK(rep.n_observations == 5);
    CHECK(rep.n_mc == 50000);
    CHECK(rep.spread_q95 > rep.spread_mean);
    CHECK(rep.spread_q95_se > 0.0);
    // the report's Monte Carlo quantile equals the standalone estimator's
    const QuantileEstimate q = spread_var95(params, 50000, 13, 2);
    CHECK(rep.spread_q95 == q.value);
    CHECK(rep.spread_q95_se == q.std_error);

    SUBCASE("JSON is machine readable and deterministic") {
        const std::string a = rep.to_json();
        const RiskReport rep2 = make_risk_report(obs, params, 50000, 13, 4);
        CHECK(a == rep2.to_json()); // thread count cannot leak into output
        const auto j = nlohmann::json::parse(a);
        CHECK(j.at("mid_sigma").get<double>() == rep.mid_sigma);
        CHECK(j.at("mid_var95").get<double>() == rep.mid_var95);
        CHECK(j.at("spread_q95").get<double>() == rep.spread_q95);
        CHECK(j.at("n_mc").get<std::size_t>() == 50000);
        CHECK(j.at("spread_kappa0").get<double>() == params.kappa0);
    }

    SUBCASE("text table mentions both rows") {
        const std::string text = rep.to_text();
        CHECK(text.find("mid") != std::string::npos);
        CHECK(text.find("spread") != std::string::npos);
        CHECK(text.find("q95") != std::string::npos);
    }

    SUBCASE("argument checking") {
        ObservableSeries one;
        one.mids = {100.0};
        one.rel_spreads = {0.01};
        CHECK_THROWS_AS(make_risk_report(one, params, 50000, 1), invalid_input);
        CHECK_THROWS_AS(make_risk_report(obs, params, 100, 1), invalid_input);
    }
}
