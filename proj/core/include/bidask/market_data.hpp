#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bidask {

struct BookLevel {
    double price = 0.0;
    double size = 0.0;
};

// One order-book snapshot. Levels are stored best-first: bids[0] is the
// highest bid, asks[0] the lowest ask. Loaders guarantee at least one
// level per side, strictly ordered prices, positive sizes, and an
// uncrossed book (best bid < best ask).
struct BookSnapshot {
    std::string timestamp;
    std::vector<BookLevel> bids;
    std::vector<BookLevel> asks;

    const BookLevel& best_bid() const;
    const BookLevel& best_ask() const;
};

// One OHLC bar. Loaders enforce 0 < low <= open, close <= high.
struct OhlcBar {
    std::string date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
};

// Book CSV schema: "timestamp,side,level,price,size" with side B or A and
// per-side levels numbered 1 (best) upward. Rows of one snapshot must be
// contiguous; when every timestamp parses as a number the sequence must be
// non-decreasing. Malformed schema, crossed books, unordered levels and
// non-positive prices or sizes raise data_error carrying source:line.
std::vector<BookSnapshot> load_book_series(std::istream& in, const std::string& source);
std::vector<BookSnapshot> load_book_series_file(const std::string& path);

std::string book_series_to_csv(const std::vector<BookSnapshot>& snapshots);

// OHLC CSV schema: "date,open,high,low,close".
std::vector<OhlcBar> load_ohlc_series(std::istream& in, const std::string& source);
std::vector<OhlcBar> load_ohlc_series_file(const std::string& path);

// Size-weighted average price over the first n levels of each side:
// (effective bid, effective ask). Requires 1 <= n <= available depth.
std::pair<double, double> effective_levels(const BookSnapshot& snap, std::size_t n);

// Queue-imbalance populations (bid first): sizes map to probabilities as
// n_bid/(n_bid+n_ask), n_ask/(n_bid+n_ask). Requires nonnegative sizes
// with a positive sum.
std::pair<double, double> population_from_sizes(double n_bid, double n_ask);

// How raw market data maps to model observables.
struct ObservableMode {
    enum class Kind { best, effective, ohlc };
    Kind kind = Kind::best;
    std::size_t levels = 1; // depth used by Kind::effective

    static ObservableMode best() { return {Kind::best, 1}; }
    static ObservableMode effective(std::size_t n) { return {Kind::effective, n}; }
    static ObservableMode ohlc() { return {Kind::ohlc, 1}; }
};

// Per-snapshot model observables. rel_spreads holds (ask - bid)/mid, the
// dimensionless spread the distribution modules work in. pop_bids is
// empty-by-flag for OHLC input, where no queue sizes exist.
struct ObservableSeries {
    std::vector<double> mids;
    std::vector<double> rel_spreads;
    std::vector<double> pop_bids;
    bool has_populations = false;

    std::size_t size() const { return mids.size(); }

    // CSV "index,mid,rel_spread,pop_bid" (1-based index; pop column empty
    // when populations are absent).
    std::string to_csv() const;
};

// Book input under best or effective mode. Passing Kind::ohlc here throws
// invalid_input (OHLC files have their own overload and no populations).
ObservableSeries extract_observables(const std::vector<BookSnapshot>& snapshots,
                                     const ObservableMode& mode);

// OHLC input: mid = (high + low)/2, rel_spread = (high - low)/mid.
ObservableSeries extract_observables(const std::vector<OhlcBar>& bars);

// Reads back the CSV produced by ObservableSeries::to_csv.
ObservableSeries load_observable_series(std::istream& in, const std::string& source);
ObservableSeries load_observable_series_file(const std::string& path);

} // namespace bidask
