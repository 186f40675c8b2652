#include "bidask/market_data.hpp"

#include "bidask/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace bidask;

namespace {

std::string data_path(const char* name) {
    return std::string(BIDASK_TEST_DATA_DIR) + "/" + name;
}

double round_cents(double x) {
    // round half away from zero to 2 decimals, the convention quote tables
    // are printed in
    return std::floor(x * 100.0 + 0.5) / 100.0;
}

} // namespace

TEST_CASE("depth-5 snapshot fixture: best and effective levels") {
    const auto series = load_book_series_file(data_path("book_depth5.csv"));
    REQUIRE(series.size() == 1);
    const BookSnapshot& snap = series[0];
    REQUIRE(snap.bids.size() == 5);
    REQUIRE(snap.asks.size() == 5);

    SUBCASE("best levels and their observables") {
        CHECK(snap.best_bid().price == 27.83);
        CHECK(snap.best_ask().price == 27.87);
        const auto obs = extract_observables(series, ObservableMode::best());
        REQUIRE(obs.size() == 1);
        CHECK(obs.mids[0] == doctest::Approx(27.85).epsilon(1e-15));
        CHECK(obs.rel_spreads[0] == doctest::Approx(0.04 / 27.85).epsilon(1e-12));
        REQUIRE(obs.has_populations);
        CHECK(obs.pop_bids[0] == 0.5); // 100 vs 100 at the top of book
    }

    SUBCASE("size-weighted levels across the full depth") {
        const auto [eb, ea] = effective_levels(snap, 5);
        // bid: (27.83*100 + 27.82*100 + 27.80*200 + 27.79*200 + 27.78*100)/700
        CHECK(eb == doctest::Approx(19461.0 / 700.0).epsilon(1e-14));
        // ask: (27.87 + 27.90 + 27.95 + 28.15 + 28.20)/5, all sizes 100
        CHECK(ea == doctest::Approx(140.07 / 5.0).epsilon(1e-14));
        CHECK(round_cents(eb) == 27.80);
        CHECK(round_cents(ea) == 28.01);

        // depth 1 degenerates to the best levels
        const auto [b1, a1] = effective_levels(snap, 1);
        CHECK(b1 == snap.best_bid().price);
        CHECK(a1 == snap.best_ask().price);

        CHECK_THROWS_AS(effective_levels(snap, 0), invalid_input);
        CHECK_THROWS_AS(effective_levels(snap, 6), invalid_input);
    }

    SUBCASE("effective-mode observables use cumulative queue sizes") {
        const auto obs = extract_observables(series, ObservableMode::effective(5));
        REQUIRE(obs.size() == 1);
        const double eb = 19461.0 / 700.0, ea = 140.07 / 5.0;
        const double mid = 0.5 * (eb + ea);
        CHECK(obs.mids[0] == doctest::Approx(mid).epsilon(1e-14));
        CHECK(obs.rel_spreads[0] == doctest::Approx((ea - eb) / mid).epsilon(1e-12));
        // cumulative sizes 700 bid vs 500 ask
        CHECK(obs.pop_bids[0] == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    }
}

TEST_CASE("population from queue sizes") {
    const auto [pb, pa] = population_from_sizes(700.0, 500.0);
    CHECK(pb == doctest::Approx(7.0 / 12.0).epsilon(1e-16));
    CHECK(pa == doctest::Approx(5.0 / 12.0).epsilon(1e-16));
    CHECK(pb + pa == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(population_from_sizes(3.0, 0.0).first == 1.0);
    CHECK_THROWS_AS(population_from_sizes(0.0, 0.0), invalid_input);
    CHECK_THROWS_AS(population_from_sizes(-1.0, 2.0), invalid_input);
}

TEST_CASE("multi-snapshot book series") {
    const auto series = load_book_series_file(data_path("book_two_snaps.csv"));
    REQUIRE(series.size() == 2);
    CHECK(series[0].timestamp == "2013-11-15T10:30:00");
    CHECK(series[1].timestamp == "2013-11-15T10:30:01");
    CHECK(series[1].bids.size() == 2);
    CHECK(series[1].best_ask().price == 27.88);

    const auto obs = extract_observables(series, ObservableMode::best());
    REQUIRE(obs.size() == 2);
    CHECK(obs.mids[1] == doctest::Approx(0.5 * (27.84 + 27.88)).epsilon(1e-14));
    CHECK(obs.pop_bids[1] == doctest::Approx(150.0 / 270.0).epsilon(1e-14));

    SUBCASE("CSV round-trip preserves the series") {
        const std::string csv = book_series_to_csv(series);
        std::istringstream in(csv);
        const auto back = load_book_series(in, "mem");
        REQUIRE(back.size() == series.size());
        for (std::size_t i = 0; i < series.size(); ++i) {
            CHECK(back[i].timestamp == series[i].timestamp);
            REQUIRE(back[i].bids.size() == series[i].bids.size());
            for (std::size_t k = 0; k < series[i].bids.size(); ++k) {
                CHECK(back[i].bids[k].price == series[i].bids[k].price);
                CHECK(back[i].bids[k].size == series[i].bids[k].size);
            }
            REQUIRE(back[i].asks.size() == series[i].asks.size());
            for (std::size_t k = 0; k < series[i].asks.size(); ++k) {
                CHECK(back[i].asks[k].price == series[i].asks[k].price);
            }
        }
    }
}

TEST_CASE("book loader rejects malformed input with line context") {
    auto load = [](const std::string& text) {
        std::istringstream in(text);
        return load_book_series(in, "t.csv");
    };
    const std::string header = "timestamp,side,level,price,size\n";

    SUBCASE("crossed book") {
        CHECK_THROWS_WITH_AS(load_book_series_file(data_path("crossed_book.csv")),
                             doctest::Contains("crossed"), data_error);
    }
    SUBCASE("bad header") {
        CHECK_THROWS_AS(load("time,side,level,price,size\nt0,B,1,1,1\n"), data_error);
    }
    SUBCASE("empty file") {
        CHECK_THROWS_AS(load(header), data_error);
    }
    SUBCASE("unknown side") {
        CHECK_THROWS_WITH_AS(load(header + "t0,X,1,10,1\nt0,A,1,11,1\n"),
                             doctest::Contains("t.csv:2"), data_error);
    }
    SUBCASE("level gap") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,1\nt0,B,3,9,1\nt0,A,1,11,1\n"), data_error);
    }
    SUBCASE("duplicate level") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,1\nt0,B,1,9,1\nt0,A,1,11,1\n"), data_error);
    }
    SUBCASE("bid prices must decrease with depth") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,1\nt0,B,2,10.5,1\nt0,A,1,11,1\n"), data_error);
    }
    SUBCASE("ask prices must increase with depth") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,1\nt0,A,1,11,1\nt0,A,2,10.9,1\n"), data_error);
    }
    SUBCASE("nonpositive size or price") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,0\nt0,A,1,11,1\n"), data_error);
        CHECK_THROWS_AS(load(header + "t0,B,1,-10,1\nt0,A,1,11,1\n"), data_error);
    }
    SUBCASE("missing side") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,1\n"), data_error);
    }
    SUBCASE("snapshot rows must be contiguous") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10,1\nt0,A,1,11,1\n"
                                      "t1,B,1,10,1\nt1,A,1,11,1\n"
                                      "t0,B,2,9,1\n"),
                        data_error);
    }
    SUBCASE("numeric timestamps must not decrease") {
        CHECK_THROWS_AS(load(header + "5,B,1,10,1\n5,A,1,11,1\n"
                                      "4,B,1,10,1\n4,A,1,11,1\n"),
                        data_error);
        // opaque string timestamps carry no order and are accepted
        const auto ok = load(header + "beta,B,1,10,1\nbeta,A,1,11,1\n"
                                      "alpha,B,1,10,1\nalpha,A,1,11,1\n");
        CHECK(ok.size() == 2);
    }
    SUBCASE("wrong field count") {
        CHECK_THROWS_AS(load(header + "t0,B,1,10\n"), data_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_book_series_file("/nonexistent/book.csv"), data_error);
    }
}

TEST_CASE("OHLC fixture and observables") {
    const auto bars = load_ohlc_series_file(data_path("ohlc_week.csv"));
    REQUIRE(bars.size() == 5);
    CHECK(bars[0].date == "2013-11-15");
    CHECK(bars[0].high == 38.02);
    CHECK(bars[4].close == 37.59);

    const auto obs = extract_observables(bars);
    REQUIRE(obs.size() == 5);
    CHECK_FALSE(obs.has_populations);
    CHECK(obs.pop_bids.empty());
    // first bar: mid = (38.02 + 37.72)/2 = 37.87, range 0.30
    CHECK(obs.mids[0] == doctest::Approx(37.87).epsilon(1e-14));
    CHECK(obs.rel_spreads[0] == doctest::Approx(0.30 / 37.87).epsilon(1e-10));

    SUBCASE("ohlc mode cannot be used with book input") {
        const auto books = load_book_series_file(data_path("book_depth5.csv"));
        CHECK_THROWS_AS(extract_observables(books, ObservableMode::ohlc()), invalid_input);
    }

    SUBCASE("loader rejects inconsistent bars") {
        auto load = [](const std::string& text) {
            std::istringstream in(text);
            return load_ohlc_series(in, "o.csv");
        };
        const std::string header = "date,open,high,low,close\n";
        CHECK_THROWS_AS(load("open,high,low,close\n"), data_error);
        // high below low
        CHECK_THROWS_WITH_AS(load(header + "d1,10,9,11,10\n"),
                             doctest::Contains("o.csv:2"), data_error);
        // close outside range
        CHECK_THROWS_AS(load(header + "d1,10,11,9,12\n"), data_error);
        // nonpositive low
        CHECK_THROWS_AS(load(header + "d1,1,2,-1,1\n"), data_error);
        CHECK_THROWS_AS(load(header), data_error);
        CHECK_THROWS_AS(load_ohlc_series_file("/nonexistent/o.csv"), data_error);
    }
}

TEST_CASE("observable series CSV round-trip") {
    const auto books = load_book_series_file(data_path("book_two_snaps.csv"));
    const auto obs = extract_observables(books, ObservableMode::effective(2));
    const std::string csv = obs.to_csv();
    CHECK(csv.rfind("index,mid,rel_spread,pop_bid\n", 0) == 0);

    std::istringstream in(csv);
    const auto back = load_observable_series(in, "mem");
    CHECK(back.mids == obs.mids);
    CHECK(back.rel_spreads == obs.rel_spreads);
    CHECK(back.pop_bids == obs.pop_bids);
    CHECK(back.has_populations == obs.has_populations);

    SUBCASE("population column is all-or-none") {
        std::istringstream bad("index,mid,rel_spread,pop_bid\n"
                               "1,10,0.01,0.5\n"
                               "2,10,0.01,\n");
        CHECK_THROWS_AS(load_observable_series(bad, "m"), data_error);
    }
    SUBCASE("populations without sizes") {
        std::istringstream ok("index,mid,rel_spread,pop_bid\n"
                              "1,10,0.01,\n"
                              "2,10,0.02,\n");
        const auto s = load_observable_series(ok, "m");
        CHECK_FALSE(s.has_populations);
        CHECK(s.size() == 2);
    }
    SUBCASE("domain checks") {
        std::istringstream bad1("index,mid,rel_spread,pop_bid\n1,10,-0.01,\n");
        CHECK_THROWS_AS(load_observable_series(bad1, "m"), data_error);
        std::istringstream bad2("index,mid,rel_spread,pop_bid\n1,10,0.01,1.5\n");
        CHECK_THROWS_AS(load_observable_series(bad2, "m"), data_error);
        CHECK_THROWS_AS(load_observable_series_file("/nonexistent/obs.csv"), data_error);
    }
}
