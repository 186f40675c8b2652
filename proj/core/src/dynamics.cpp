#include "bidask/dynamics.hpp"

#include "bidask/errors.hpp"
#include "bidask/rng.hpp"
#include "bidask/stats.hpp"

#include "detail_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

namespace bidask {

namespace {

double parse_field(const std::string& field, const std::string& source, std::size_t line,
                   const char* what) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v))
        throw data_error(located(source, line,
                                 std::string("cannot parse ") + what + " '" + field + "'"));
    return v;
}

} // namespace

double AmplitudeState::norm_sq() const {
    return std::norm(psi_ask) + std::norm(psi_bid);
}

double AmplitudeState::population_ask() const { return std::norm(psi_ask); }

double AmplitudeState::population_bid() const { return std::norm(psi_bid); }

void AmplitudeState::require_normalized() const {
    if (!std::isfinite(psi_ask.real()) || !std::isfinite(psi_ask.imag()) ||
        !std::isfinite(psi_bid.real()) || !std::isfinite(psi_bid.imag()))
        throw invalid_state("AmplitudeState: non-finite amplitudes");
    if (std::abs(norm_sq() - 1.0) > 1e-6)
        throw invalid_state("AmplitudeState: norm^2 deviates from 1 by more than 1e-6");
}

AmplitudeState step_amplitudes(const AmplitudeState& state, const PriceOperator2x2& op,
                               double dt, double rho, bool renormalize) {
    state.require_normalized();
    op.validate();
    if (!(dt > 0.0) || !(rho > 0.0))
        throw invalid_input("step_amplitudes: dt and rho must be > 0");

    const double tau = dt / rho;
    const double half_trace = 0.5 * (op.s11 + op.s22);
    const double half_gap = 0.5 * (op.s11 - op.s22);
    const double r = std::sqrt(half_gap * half_gap + std::norm(op.s12));

    using cd = std::complex<double>;
    const cd phase = std::polar(1.0, -half_trace * tau);

    // U = phase * (cos(r tau) I - i sin(r tau)/r [[g, s12], [s12*, -g]]),
    // reducing to phase * I when r == 0.
    cd u11 = phase, u12(0.0, 0.0), u21(0.0, 0.0), u22 = phase;
    if (r != 0.0) {
        const double cr = std::cos(r * tau);
        const double sr = std::sin(r * tau);
        const cd mi(0.0, -1.0);
        u11 = phase * (cd(cr, 0.0) + mi * (half_gap / r) * sr);
        u12 = phase * (mi * (op.s12 / r) * sr);
        u21 = phase * (mi * (std::conj(op.s12) / r) * sr);
        u22 = phase * (cd(cr, 0.0) - mi * (half_gap / r) * sr);
    }

    AmplitudeState out;
    out.psi_ask = u11 * state.psi_ask + u12 * state.psi_bid;
    out.psi_bid = u21 * state.psi_ask + u22 * state.psi_bid;

    if (renormalize) {
        const double n = std::sqrt(out.norm_sq());
        out.psi_ask /= n;
        out.psi_bid /= n;
    }
    return out;
}

std::string Trajectory::to_csv() const {
    std::string out = "step,time,mid,spread,pop_ask\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += detail::format_double(times[i]);
        out += ',';
        out += detail::format_double(mids[i]);
        out += ',';
        out += detail::format_double(spreads[i]);
        out += ',';
        out += detail::format_double(populations_ask[i]);
        out += '\n';
    }
    return out;
}

Trajectory load_trajectory_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw data_error(located(source, 1, "empty file"));
    ++lineno;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "step,time,mid,spread,pop_ask")
        throw data_error(located(source, 1,
                                 "expected trajectory header 'step,time,mid,spread,pop_ask', "
                                 "got '" + line + "'"));
    Trajectory traj;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (fields.size() != 5)
            throw data_error(located(source, lineno, "expected 5 fields, got " +
                                                         std::to_string(fields.size())));
        traj.times.push_back(parse_field(fields[1], source, lineno, "time"));
        traj.mids.push_back(parse_field(fields[2], source, lineno, "mid"));
        traj.spreads.push_back(parse_field(fields[3], source, lineno, "spread"));
        const double p = parse_field(fields[4], source, lineno, "pop_ask");
        if (p < 0.0 || p > 1.0)
            throw data_error(located(source, lineno, "pop_ask must lie in [0,1]"));
        traj.populations_ask.push_back(p);
    }
    if (traj.times.empty())
        throw data_error(located(source, lineno, "no steps in file"));
    return traj;
}

Trajectory load_trajectory_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error(path + ": cannot open file");
    return load_trajectory_csv(in, path);
}

Trajectory simulate_trajectory(const AmplitudeState& init, const ModelParams& params,
                               std::size_t n_steps, std::uint64_t seed, double mid0) {
    params.validate();
    init.require_normalized();
    if (n_steps == 0)
        throw invalid_input("simulate_trajectory: n_steps must be >= 1");
    if (!std::isfinite(mid0))
        throw invalid_input("simulate_trajectory: mid0 must be finite");

    ShockStreams shocks(seed);
    Trajectory traj;
    traj.times.reserve(n_steps);
    traj.mids.reserve(n_steps);
    traj.spreads.reserve(n_steps);
    traj.populations_ask.reserve(n_steps);

    AmplitudeState state = init;
    double mid = mid0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const Shocks s{shocks.z(), shocks.u(), shocks.v()};
        const PriceOperator2x2 op = build_operator(mid, params, s);
        state = step_amplitudes(state, op, params.dt, params.rho);
        const EigenPrices prices = eigen_prices(op);
        mid = prices.mid;
        traj.times.push_back(static_cast<double>(k) * params.dt);
        traj.mids.push_back(prices.mid);
        traj.spreads.push_back(prices.spread);
        traj.populations_ask.push_back(state.population_ask());
    }
    return traj;
}

double rho_from_phase_scale(double mean_price, double dt, double phase_scale) {
    if (!(mean_price > 0.0) || !(dt > 0.0) || !(phase_scale > 0.0))
        throw invalid_input("rho_from_phase_scale: all arguments must be > 0");
    return mean_price * dt / phase_scale;
}

std::size_t default_burn_in(const ModelParams& params) {
    params.validate();
    if (params.kappa0 == 0.0)
        return 1000;
    // Population oscillation (Rabi) period in steps for the offset-driven
    // coupling: 2 pi / (kappa0 tau) with tau = dt / rho.
    const double tau = params.dt / params.rho;
    const double period = 2.0 * std::numbers::pi / (params.kappa0 * tau);
    return static_cast<std::size_t>(std::ceil(10.0 * period));
}

std::vector<double> PopulationHistogram::fractions() const {
    std::vector<double> f(counts.size(), 0.0);
    if (total == 0)
        return f;
    for (std::size_t i = 0; i < counts.size(); ++i)
        f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return f;
}

PopulationHistogram population_histogram(const Trajectory& traj, std::size_t burn_in,
                                         std::size_t n_bins) {
    if (n_bins < 2)
        throw invalid_input("population_histogram: n_bins must be >= 2");
    if (burn_in >= traj.size())
        throw invalid_input("population_histogram: burn_in must be < trajectory length");

    PopulationHistogram h;
    h.edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i)
        h.edges[i] = static_cast<double>(i) / static_cast<double>(n_bins);
    h.counts.assign(n_bins, 0);
    for (std::size_t i = burn_in; i < traj.size(); ++i) {
        const double p = traj.populations_ask[i];
        const auto bin = std::min(static_cast<std::size_t>(p * static_cast<double>(n_bins)),
                                  n_bins - 1);
        ++h.counts[bin];
        ++h.total;
    }
    return h;
}

PopulationHistogram ensemble_population_histogram(const ModelParams& params,
                                                  std::size_t n_trajectories,
                                                  std::size_t n_steps, std::size_t n_bins,
                                                  std::size_t burn_in, std::uint64_t seed,
                                                  double mid0) {
    params.validate();
    if (n_trajectories == 0)
        throw invalid_input("ensemble_population_histogram: need at least one trajectory");
    if (n_bins < 2)
        throw invalid_input("ensemble_population_histogram: n_bins must be >= 2");
    if (burn_in >= n_steps)
        throw invalid_input("ensemble_population_histogram: burn_in must be < n_steps");

    PopulationHistogram h;
    h.edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i)
        h.edges[i] = static_cast<double>(i) / static_cast<double>(n_bins);
    h.counts.assign(n_bins, 0);

    const AmplitudeState pole; // pure ask state
    for (std::size_t t = 0; t < n_trajectories; ++t) {
        const Trajectory traj =
            simulate_trajectory(pole, params, n_steps, derive_seed(seed, t), mid0);
        for (std::size_t i = burn_in; i < traj.size(); ++i) {
            const double p = traj.populations_ask[i];
            const auto bin = std::min(
                static_cast<std::size_t>(p * static_cast<double>(n_bins)), n_bins - 1);
            ++h.counts[bin];
            ++h.total;
        }
    }
    return h;
}

double theoretical_population_pdf(double p, double pmin, double pmax) {
    if (!(pmin < pmax))
        throw invalid_input("theoretical_population_pdf: pmin must be < pmax");
    if (!(p > pmin && p < pmax))
        throw invalid_input("theoretical_population_pdf: p must lie strictly inside (pmin, pmax)");
    return 1.0 / (std::numbers::pi * std::sqrt((pmax - p) * (p - pmin)));
}

GammaRatioReport gamma_ratio_check(double theta, std::size_t n, std::uint64_t seed) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw invalid_input("gamma_ratio_check: theta must be positive and finite");
    if (n < 1000)
        throw invalid_input("gamma_ratio_check: n must be >= 1000");

    // Gamma(1/2, theta) == theta/2 * Z^2 for standard normal Z, so the two
    // queue sizes come straight from squared normals.
    NormalStream za(derive_seed(seed, 0));
    NormalStream zb(derive_seed(seed, 1));
    std::vector<double> ratios;
    ratios.reserve(n);
    while (ratios.size() < n) {
        const double a = za();
        const double b = zb();
        const double n_ask = 0.5 * theta * a * a;
        const double n_bid = 0.5 * theta * b * b;
        const double denom = n_ask + n_bid;
        if (denom == 0.0)
            continue; // measure-zero degenerate draw
        ratios.push_back(n_bid / denom);
    }
    std::sort(ratios.begin(), ratios.end());

    GammaRatioReport rep;
    rep.theta = theta;
    rep.n = n;
    rep.ks = stats::ks_distance(ratios, [](double x) { return stats::arcsine_cdf(x); });
    rep.critical_1pct = stats::ks_critical_value(n, 0.01);
    rep.pass = rep.ks < rep.critical_1pct;
    return rep;
}

} // namespace bidask
