#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bidask::optim {

struct NelderMeadOptions {
    int max_iters = 2000;
    double x_tol = 1e-6; // max vertex spread per coordinate
    double f_tol = 1e-7; // best-worst objective spread

    void validate() const;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Derivative-free simplex minimization (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2). The initial simplex is x0 plus one vertex
// per coordinate displaced by step[i] (step[i] != 0). Deterministic; the
// objective must return finite values or +inf for out-of-region points.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> x0, std::span<const double> step,
                             const NelderMeadOptions& opts = {});

} // namespace bidask::optim
