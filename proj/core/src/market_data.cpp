#include "bidask/market_data.hpp"

#include "bidask/errors.hpp"

#include "detail_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace bidask {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        out.push_back("");
    return out;
}

double parse_double(const std::string& field, const std::string& source, std::size_t line,
                    const char* what) {
    const std::string t = trim(field);
    if (t.empty())
        throw data_error(located(source, line, std::string("empty ") + what + " field"));
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
        throw data_error(located(source, line, std::string("cannot parse ") + what + " '" + t + "'"));
    return v;
}

std::size_t parse_level(const std::string& field, const std::string& source, std::size_t line) {
    const double v = parse_double(field, source, line, "level");
    if (v < 1.0 || v != std::floor(v) || v > 1e6)
        throw data_error(located(source, line, "level must be a positive integer"));
    return static_cast<std::size_t>(v);
}

struct RawBookRow {
    std::size_t line = 0;
    char side = 'B';
    std::size_t level = 0;
    double price = 0.0;
    double size = 0.0;
};

void finalize_snapshot(BookSnapshot& snap, std::vector<RawBookRow>& rows,
                       const std::string& source) {
    std::vector<BookLevel>* sides[2] = {&snap.bids, &snap.asks};
    for (int s = 0; s < 2; ++s) {
        const char side = s == 0 ? 'B' : 'A';
        std::vector<RawBookRow> mine;
        for (const auto& r : rows)
            if (r.side == side)
                mine.push_back(r);
        if (mine.empty())
            throw data_error(located(source, rows.front().line,
                                     std::string("snapshot '") + snap.timestamp +
                                         "' has no " + (s == 0 ? "bid" : "ask") + " levels"));
        std::sort(mine.begin(), mine.end(),
                  [](const RawBookRow& a, const RawBookRow& b) { return a.level < b.level; });
        for (std::size_t i = 0; i < mine.size(); ++i) {
            if (mine[i].level != i + 1)
                throw data_error(located(source, mine[i].line,
                                         "levels must run 1,2,... per side without gaps or "
                                         "duplicates"));
            if (i > 0) {
                const bool ordered = s == 0 ? mine[i].price < mine[i - 1].price
                                            : mine[i].price > mine[i - 1].price;
                if (!ordered)
                    throw data_error(located(source, mine[i].line,
                                             s == 0 ? "bid prices must decrease with level"
                                                    : "ask prices must increase with level"));
            }
            sides[s]->push_back({mine[i].price, mine[i].size});
        }
    }
    if (snap.bids.front().price >= snap.asks.front().price)
        throw data_error(located(source, rows.front().line,
                                 "crossed book in snapshot '" + snap.timestamp + "': best bid " +
                                     detail::format_double(snap.bids.front().price) +
                                     " >= best ask " +
                                     detail::format_double(snap.asks.front().price)));
    rows.clear();
}

bool parse_numeric(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size() && std::isfinite(out);
}

} // namespace

const BookLevel& BookSnapshot::best_bid() const {
    if (bids.empty())
        throw invalid_state("BookSnapshot: no bid levels");
    return bids.front();
}

const BookLevel& BookSnapshot::best_ask() const {
    if (asks.empty())
        throw invalid_state("BookSnapshot: no ask levels");
    return asks.front();
}

std::vector<BookSnapshot> load_book_series(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw data_error(located(source, 1, "empty file"));
    ++lineno;
    if (trim(line) != "timestamp,side,level,price,size")
        throw data_error(located(source, 1,
                                 "expected book header 'timestamp,side,level,price,size', got '" +
                                     trim(line) + "'"));

    std::vector<BookSnapshot> out;
    std::unordered_set<std::string> seen;
    std::string current_ts;
    std::vector<RawBookRow> rows;
    BookSnapshot snap;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv(line);
        if (fields.size() != 5)
            throw data_error(located(source, lineno, "expected 5 fields, got " +
                                                         std::to_string(fields.size())));
        const std::string& ts = fields[0];
        if (ts.empty())
            throw data_error(located(source, lineno, "empty timestamp"));
        const std::string side_s = fields[1];
        if (side_s != "B" && side_s != "A")
            throw data_error(located(source, lineno, "side must be 'B' or 'A', got '" + side_s + "'"));

        RawBookRow row;
        row.line = lineno;
        row.side = side_s[0];
        row.level = parse_level(fields[2], source, lineno);
        row.price = parse_double(fields[3], source, lineno, "price");
        row.size = parse_double(fields[4], source, lineno, "size");
        if (row.price <= 0.0)
            throw data_error(located(source, lineno, "price must be > 0"));
        if (row.size <= 0.0)
            throw data_error(located(source, lineno, "size must be > 0"));

        if (ts != current_ts) {
            if (!rows.empty()) {
                finalize_snapshot(snap, rows, source);
                out.push_back(std::move(snap));
            }
            if (!seen.insert(ts).second)
                throw data_error(located(source, lineno,
                                         "rows of snapshot '" + ts + "' are not contiguous"));
            snap = BookSnapshot{};
            snap.timestamp = ts;
            current_ts = ts;
        }
        rows.push_back(row);
    }
    if (!rows.empty()) {
        finalize_snapshot(snap, rows, source);
        out.push_back(std::move(snap));
    }
    if (out.empty())
        throw data_error(located(source, lineno, "no snapshots in file"));

    // Opaque timestamps are accepted as-is; when they are all numeric the
    // sequence must be non-decreasing.
    bool all_numeric = true;
    std::vector<double> ts_num(out.size());
    for (std::size_t i = 0; i < out.size() && all_numeric; ++i)
        all_numeric = parse_numeric(out[i].timestamp, ts_num[i]);
    if (all_numeric)
        for (std::size_t i = 1; i < out.size(); ++i)
            if (ts_num[i] < ts_num[i - 1])
                throw data_error(source + ": numeric timestamps must be non-decreasing ('" +
                                 out[i].timestamp + "' after '" + out[i - 1].timestamp + "')");
    return out;
}

std::vector<BookSnapshot> load_book_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error(path + ": cannot open file");
    return load_book_series(in, path);
}

std::string book_series_to_csv(const std::vector<BookSnapshot>& snapshots) {
    std::string out = "timestamp,side,level,price,size\n";
    for (const auto& snap : snapshots) {
        for (std::size_t i = 0; i < snap.bids.size(); ++i)
            out += snap.timestamp + ",B," + std::to_string(i + 1) + ',' +
                   detail::format_double(snap.bids[i].price) + ',' +
                   detail::format_double(snap.bids[i].size) + '\n';
        for (std::size_t i = 0; i < snap.asks.size(); ++i)
            out += snap.timestamp + ",A," + std::to_string(i + 1) + ',' +
                   detail::format_double(snap.asks[i].price) + ',' +
                   detail::format_double(snap.asks[i].size) + '\n';
    }
    return out;
}

std::vector<OhlcBar> load_ohlc_series(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw data_error(located(source, 1, "empty file"));
    ++lineno;
    if (trim(line) != "date,open,high,low,close")
        throw data_error(located(source, 1,
                                 "expected OHLC header 'date,open,high,low,close', got '" +
                                     trim(line) + "'"));
    std::vector<OhlcBar> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv(line);
        if (fields.size() != 5)
            throw data_error(located(source, lineno, "expected 5 fields, got " +
                                                         std::to_string(fields.size())));
        OhlcBar bar;
        bar.date = fields[0];
        if (bar.date.empty())
            throw data_error(located(source, lineno, "empty date"));
        bar.open = parse_double(fields[1], source, lineno, "open");
        bar.high = parse_double(fields[2], source, lineno, "high");
        bar.low = parse_double(fields[3], source, lineno, "low");
        bar.close = parse_double(fields[4], source, lineno, "close");
        if (bar.low <= 0.0)
            throw data_error(located(source, lineno, "prices must be > 0"));
        if (bar.high < bar.low || bar.open > bar.high || bar.open < bar.low ||
            bar.close > bar.high || bar.close < bar.low)
            throw data_error(located(source, lineno,
                                     "OHLC bar violates low <= open,close <= high"));
        out.push_back(std::move(bar));
    }
    if (out.empty())
        throw data_error(located(source, lineno, "no bars in file"));
    return out;
}

std::vector<OhlcBar> load_ohlc_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error(path + ": cannot open file");
    return load_ohlc_series(in, path);
}

std::pair<double, double> effective_levels(const BookSnapshot& snap, std::size_t n) {
    if (n < 1)
        throw invalid_input("effective_levels: depth must be >= 1");
    if (n > snap.bids.size() || n > snap.asks.size())
        throw invalid_input("effective_levels: depth " + std::to_string(n) +
                            " exceeds available levels (bids " + std::to_string(snap.bids.size()) +
                            ", asks " + std::to_string(snap.asks.size()) + ")");
    double pb = 0.0, sb = 0.0, pa = 0.0, sa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        pb += snap.bids[i].price * snap.bids[i].size;
        sb += snap.bids[i].size;
        pa += snap.asks[i].price * snap.asks[i].size;
        sa += snap.asks[i].size;
    }
    return {pb / sb, pa / sa};
}

std::pair<double, double> population_from_sizes(double n_bid, double n_ask) {
    if (!(n_bid >= 0.0) || !(n_ask >= 0.0) || !std::isfinite(n_bid) || !std::isfinite(n_ask))
        throw invalid_input("population_from_sizes: sizes must be finite and >= 0");
    const double total = n_bid + n_ask;
    if (!(total > 0.0))
        throw invalid_input("population_from_sizes: total size must be > 0");
    return {n_bid / total, n_ask / total};
}

std::string ObservableSeries::to_csv() const {
    std::string out = "index,mid,rel_spread,pop_bid\n";
    for (std::size_t i = 0; i < mids.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += detail::format_double(mids[i]);
        out += ',';
        out += detail::format_double(rel_spreads[i]);
        out += ',';
        if (has_populations)
            out += detail::format_double(pop_bids[i]);
        out += '\n';
    }
    return out;
}

ObservableSeries extract_observables(const std::vector<BookSnapshot>& snapshots,
                                     const ObservableMode& mode) {
    if (mode.kind == ObservableMode::Kind::ohlc)
        throw invalid_input("extract_observables: OHLC mode needs OHLC bars, not book snapshots");
    ObservableSeries series;
    series.has_populations = true;
    for (const auto& snap : snapshots) {
        double bid, ask, size_bid, size_ask;
        if (mode.kind == ObservableMode::Kind::best) {
            bid = snap.best_bid().price;
            ask = snap.best_ask().price;
            size_bid = snap.best_bid().size;
            size_ask = snap.best_ask().size;
        } else {
            std::tie(bid, ask) = effective_levels(snap, mode.levels);
            size_bid = size_ask = 0.0;
            for (std::size_t i = 0; i < mode.levels; ++i) {
                size_bid += snap.bids[i].size;
                size_ask += snap.asks[i].size;
            }
        }
        const double mid = 0.5 * (bid + ask);
        series.mids.push_back(mid);
        series.rel_spreads.push_back((ask - bid) / mid);
        series.pop_bids.push_back(population_from_sizes(size_bid, size_ask).first);
    }
    return series;
}

ObservableSeries extract_observables(const std::vector<OhlcBar>& bars) {
    ObservableSeries series;
    series.has_populations = false;
    for (const auto& bar : bars) {
        const double mid = 0.5 * (bar.high + bar.low);
        series.mids.push_back(mid);
        series.rel_spreads.push_back((bar.high - bar.low) / mid);
    }
    return series;
}

ObservableSeries load_observable_series(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw data_error(located(source, 1, "empty file"));
    ++lineno;
    if (trim(line) != "index,mid,rel_spread,pop_bid")
        throw data_error(located(source, 1,
                                 "expected observables header 'index,mid,rel_spread,pop_bid', "
                                 "got '" + trim(line) + "'"));
    ObservableSeries series;
    bool any_pop = false, all_pop = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4)
            throw data_error(located(source, lineno, "expected 4 fields, got " +
                                                         std::to_string(fields.size())));
        series.mids.push_back(parse_double(fields[1], source, lineno, "mid"));
        const double rs = parse_double(fields[2], source, lineno, "rel_spread");
        if (rs < 0.0)
            throw data_error(located(source, lineno, "rel_spread must be >= 0"));
        series.rel_spreads.push_back(rs);
        if (fields[3].empty()) {
            series.pop_bids.push_back(0.0);
            all_pop = false;
        } else {
            const double p = parse_double(fields[3], source, lineno, "pop_bid");
            if (p < 0.0 || p > 1.0)
                throw data_error(located(source, lineno, "pop_bid must lie in [0,1]"));
            series.pop_bids.push_back(p);
            any_pop = true;
        }
    }
    if (series.mids.empty())
        throw data_error(located(source, lineno, "no observations in file"));
    if (any_pop && !all_pop)
        throw data_error(source + ": pop_bid must be present on all rows or none");
    series.has_populations = any_pop;
    if (!any_pop)
        series.pop_bids.clear();
    return series;
}

ObservableSeries load_observable_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error(path + ": cannot open file");
    return load_observable_series(in, path);
}

} // namespace bidask
