#include "bidask/nelder_mead.hpp"

#include "bidask/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bidask::optim {

void NelderMeadOptions::validate() const {
    if (max_iters < 1)
        throw invalid_input("NelderMeadOptions: max_iters must be >= 1");
    if (!(x_tol > 0.0) || !(f_tol > 0.0))
        throw invalid_input("NelderMeadOptions: tolerances must be > 0");
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> x0, std::span<const double> step,
                             const NelderMeadOptions& opts) {
    opts.validate();
    const std::size_t dim = x0.size();
    if (dim == 0)
        throw invalid_input("nelder_mead: empty starting point");
    if (step.size() != dim)
        throw invalid_input("nelder_mead: step size count must match dimension");
    for (double s : step)
        if (s == 0.0 || !std::isfinite(s))
            throw invalid_input("nelder_mead: steps must be finite and nonzero");

    const std::size_t nv = dim + 1;
    std::vector<std::vector<double>> verts(nv, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t i = 1; i < nv; ++i)
        verts[i][i - 1] += step[i - 1];
    std::vector<double> fv(nv);
    for (std::size_t i = 0; i < nv; ++i)
        fv[i] = objective(verts[i]);

    std::vector<std::size_t> order(nv);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);

    auto sort_order = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    NelderMeadResult result;
    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        sort_order();
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[nv - 2];

        // Convergence: simplex collapsed in x and f.
        double xspread = 0.0;
        for (std::size_t i = 0; i < nv; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                xspread = std::max(xspread, std::abs(verts[i][d] - verts[best][d]));
        const double fspread = std::abs(fv[worst] - fv[best]);
        if (xspread < opts.x_tol && fspread < opts.f_tol) {
            result.converged = true;
            break;
        }

        for (std::size_t d = 0; d < dim; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < nv; ++i)
                if (i != worst)
                    s += verts[i][d];
            centroid[d] = s / static_cast<double>(dim);
        }

        for (std::size_t d = 0; d < dim; ++d)
            xr[d] = centroid[d] + (centroid[d] - verts[worst][d]);
        const double fr = objective(xr);

        if (fr < fv[best]) {
            for (std::size_t d = 0; d < dim; ++d)
                xe[d] = centroid[d] + 2.0 * (centroid[d] - verts[worst][d]);
            const double fe = objective(xe);
            if (fe < fr) {
                verts[worst] = xe;
                fv[worst] = fe;
            } else {
                verts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second_worst]) {
            verts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const std::vector<double>& ref = outside ? xr : verts[worst];
            for (std::size_t d = 0; d < dim; ++d)
                xc[d] = centroid[d] + 0.5 * (ref[d] - centroid[d]);
            const double fc = objective(xc);
            if (fc < std::min(fr, fv[worst])) {
                verts[worst] = xc;
                fv[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for (std::size_t i = 0; i < nv; ++i) {
                    if (i == best)
                        continue;
                    for (std::size_t d = 0; d < dim; ++d)
                        verts[i][d] = verts[best][d] + 0.5 * (verts[i][d] - verts[best][d]);
                    fv[i] = objective(verts[i]);
                }
            }
        }
    }

    sort_order();
    result.x = verts[order.front()];
    result.fx = fv[order.front()];
    result.iterations = iter;
    return result;
}

} // namespace bidask::optim
