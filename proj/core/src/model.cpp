#include "bidask/model.hpp"

#include "bidask/errors.hpp"

#include <cmath>

namespace bidask {

void PriceOperator2x2::validate() const {
    if (!std::isfinite(s11) || !std::isfinite(s22) ||
        !std::isfinite(s12.real()) || !std::isfinite(s12.imag()))
        throw invalid_input("PriceOperator2x2: entries must be finite");
}

void ModelParams::validate() const {
    const double fields[] = {sigma, xi0, xi1, kappa0, kappa1, rho, dt};
    for (double f : fields)
        if (!std::isfinite(f))
            throw invalid_input("ModelParams: fields must be finite");
    if (sigma < 0.0 || xi0 < 0.0 || xi1 < 0.0 || kappa0 < 0.0 || kappa1 < 0.0)
        throw invalid_input("ModelParams: sigma, offsets and shock scales must be >= 0");
    if (!(rho > 0.0))
        throw invalid_input("ModelParams: rho must be > 0");
    if (!(dt > 0.0))
        throw invalid_input("ModelParams: dt must be > 0");
}

EigenPrices eigen_prices(const PriceOperator2x2& op) {
    op.validate();
    const double half_trace = 0.5 * (op.s11 + op.s22);
    const double half_gap = 0.5 * (op.s11 - op.s22);
    const double r = std::sqrt(half_gap * half_gap + std::norm(op.s12));
    EigenPrices out;
    out.ask = half_trace + r;
    out.bid = half_trace - r;
    out.mid = half_trace;
    out.spread = 2.0 * r;
    return out;
}

double step_mid(double mid_prev, double sigma, double dz, double dt) {
    if (!std::isfinite(mid_prev) || !std::isfinite(dz))
        throw invalid_input("step_mid: arguments must be finite");
    if (sigma < 0.0 || !(dt > 0.0))
        throw invalid_input("step_mid: sigma must be >= 0 and dt > 0");
    return mid_prev + sigma * std::sqrt(dt) * dz;
}

PriceOperator2x2 build_operator(double mid_prev, const ModelParams& params, const Shocks& shocks) {
    params.validate();
    if (!std::isfinite(mid_prev) || !std::isfinite(shocks.dz) ||
        !std::isfinite(shocks.du) || !std::isfinite(shocks.dv))
        throw invalid_input("build_operator: mid_prev and shocks must be finite");
    const double common = step_mid(mid_prev, params.sigma, shocks.dz, params.dt);
    const double xi = params.xi0 + params.xi1 * shocks.du;
    const double coupling = params.kappa0 + params.kappa1 * shocks.dv;
    PriceOperator2x2 op;
    op.s11 = common + 0.5 * xi;
    op.s22 = common - 0.5 * xi;
    op.s12 = std::complex<double>(0.5 * coupling, 0.0);
    return op;
}

double spread_realization(const ModelParams& params, double du, double dv) {
    params.validate();
    if (!std::isfinite(du) || !std::isfinite(dv))
        throw invalid_input("spread_realization: shocks must be finite");
    const double xi = params.xi0 + params.xi1 * du;
    const double coupling = params.kappa0 + params.kappa1 * dv;
    // sqrt rather than hypot so the result is bit-identical to the
    // eigenvalue route 2 * sqrt((xi/2)^2 + (coupling/2)^2).
    return std::sqrt(xi * xi + coupling * coupling);
}

} // namespace bidask
