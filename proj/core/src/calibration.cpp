#include "bidask/calibration.hpp"

#include "bidask/errors.hpp"
#include "bidask/nelder_mead.hpp"
#include "bidask/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace bidask {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kGridNodes = 1025;

// log(pdf / delta), finite down to delta == 0 for positive scales; this is
// the smooth part of the log density the interpolation grid tabulates.
double logpdf_minus_logdelta(double delta, const SpreadDistParams& p) {
    if (delta == 0.0) {
        const double tx = p.xi0 / p.xi1;
        const double ty = p.kappa0 / p.kappa1;
        return -0.5 * (tx * tx + ty * ty) - std::log(p.xi1 * p.kappa1);
    }
    return spread_logpdf_general(delta, p) - std::log(delta);
}

// Surrogate negative log likelihood: exact quadrature on kGridNodes
// uniform nodes over [0, 1.02 * max(sample)], cubic Hermite interpolation
// (Catmull-Rom slopes) at the samples. The sum of log(delta_i) is a
// parameter-independent constant handled by the caller.
class GridNll {
public:
    GridNll(std::span<const double> samples, double dmax)
        : samples_(samples), dmax_(dmax), h_(dmax / static_cast<double>(kGridNodes - 1)) {
        log_delta_sum_ = 0.0;
        for (double d : samples_)
            log_delta_sum_ += std::log(d);
    }

    double operator()(const SpreadDistParams& p) const {
        std::array<double, kGridNodes> g;
        for (std::size_t j = 0; j < kGridNodes; ++j)
            g[j] = logpdf_minus_logdelta(static_cast<double>(j) * h_, p);

        double acc = 0.0;
        const double inv_h = 1.0 / h_;
        for (double d : samples_) {
            const double pos = d * inv_h;
            std::size_t j = static_cast<std::size_t>(pos);
            if (j >= kGridNodes - 1)
                j = kGridNodes - 2;
            const double t = pos - static_cast<double>(j);
            const double m0 = j == 0 ? g[1] - g[0] : 0.5 * (g[j + 1] - g[j - 1]);
            const double m1 = j + 2 >= kGridNodes ? g[j + 1] - g[j]
                                                  : 0.5 * (g[j + 2] - g[j]);
            const double t2 = t * t;
            const double t3 = t2 * t;
            const double val = g[j] * (2.0 * t3 - 3.0 * t2 + 1.0) +
                               m0 * (t3 - 2.0 * t2 + t) +
                               g[j + 1] * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2);
            acc += val;
        }
        return -(acc + log_delta_sum_);
    }

private:
    std::span<const double> samples_;
    double dmax_;
    double h_;
    double log_delta_sum_;
};

struct SampleStats {
    double median = 0.0;
    double sd = 0.0;
    double max = 0.0;
};

SampleStats sample_stats(std::span<const double> samples) {
    SampleStats s;
    s.median = stats::empirical_quantile(samples, 0.5);
    s.max = *std::max_element(samples.begin(), samples.end());
    const double m = stats::mean(samples);
    double acc = 0.0;
    for (double x : samples) {
        const double d = x - m;
        acc += d * d;
    }
    s.sd = std::sqrt(acc / static_cast<double>(samples.size()));
    return s;
}

SpreadDistParams decode(std::span<const double> t, bool fit_xi0, double scale_floor) {
    SpreadDistParams p;
    if (fit_xi0) {
        p.xi0 = std::abs(t[0]);
        p.xi1 = std::max(std::exp(t[1]), scale_floor);
        p.kappa0 = std::abs(t[2]);
        p.kappa1 = std::max(std::exp(t[3]), scale_floor);
    } else {
        p.xi0 = 0.0;
        p.xi1 = std::max(std::exp(t[0]), scale_floor);
        p.kappa0 = std::abs(t[1]);
        p.kappa1 = std::max(std::exp(t[2]), scale_floor);
    }
    return p;
}

// Cholesky factorization; returns false when the matrix is not positive
// definite. Row-major n x n, overwritten by L.
bool cholesky(std::vector<double>& a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (!(s > 0.0))
                    return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
        for (std::size_t j = i + 1; j < n; ++j)
            a[i * n + j] = 0.0;
    }
    return true;
}

// Diagonal of inverse(A) from its Cholesky factor L: solve L y = e_i,
// L^T x = y per unit vector.
std::vector<double> inverse_diagonal(const std::vector<double>& l, std::size_t n) {
    std::vector<double> diag(n, 0.0), y(n), x(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = i == c ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k)
                s -= l[i * n + k] * y[k];
            y[i] = s / l[i * n + i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k)
                s -= l[k * n + ii] * x[k];
            x[ii] = s / l[ii * n + ii];
        }
        diag[c] = x[c];
    }
    return diag;
}

} // namespace

void FitOptions::validate() const {
    if (restarts < 1)
        throw invalid_input("FitOptions: restarts must be >= 1");
    if (max_iters < 1)
        throw invalid_input("FitOptions: max_iters must be >= 1");
    if (!(x_tol > 0.0) || !(f_tol > 0.0))
        throw invalid_input("FitOptions: tolerances must be > 0");
    if (n_threads < 1)
        throw invalid_input("FitOptions: n_threads must be >= 1");
    if (min_samples < 2)
        throw invalid_input("FitOptions: min_samples must be >= 2");
}

double negative_log_likelihood(const SpreadDistParams& params, std::span<const double> samples) {
    params.validate();
    if (samples.empty())
        throw invalid_input("negative_log_likelihood: empty sample");
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!std::isfinite(samples[i]) || samples[i] <= 0.0)
            throw invalid_input("negative_log_likelihood: sample " + std::to_string(i) +
                                " is not a positive finite spread");
    double acc = 0.0;
    for (double d : samples) {
        const double lp = spread_logpdf_general(d, params);
        if (lp == -kInf)
            return kInf;
        acc += lp;
    }
    return -acc;
}

FitResult fit_spread_params(std::span<const double> samples, const FitOptions& options) {
    options.validate();
    if (samples.size() < options.min_samples)
        throw invalid_input("fit_spread_params: calibration needs at least " +
                            std::to_string(options.min_samples) + " samples, got " +
                            std::to_string(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!std::isfinite(samples[i]) || samples[i] <= 0.0)
            throw invalid_input("fit_spread_params: sample " + std::to_string(i) +
                                " is not a positive finite spread");

    const SampleStats st = sample_stats(samples);
    const double scale_floor = 1e-6 * st.median;
    const double sd = std::max(st.sd, 1e-3 * st.median);
    const GridNll surrogate(samples, st.max * 1.02);
    const bool fit_xi0 = options.fit_xi0;

    const auto objective = [&](std::span<const double> t) {
        return surrogate(decode(t, fit_xi0, scale_floor));
    };

    // Restart inits cover both scale orderings plus low/high offset
    // hypotheses; extra restarts stretch the scale ratio further.
    std::vector<std::vector<double>> inits;
    const auto push_init = [&](double a, double k0, double b) {
        std::vector<double> t;
        if (fit_xi0)
            t = {0.3 * st.median, std::log(sd * a), k0, std::log(sd * b)};
        else
            t = {std::log(sd * a), k0, std::log(sd * b)};
        inits.push_back(std::move(t));
    };
    push_init(0.6, st.median * 0.8, 1.2);
    push_init(1.2, st.median * 0.8, 0.6);
    push_init(1.0, st.median * 0.3, 1.0);
    push_init(0.5, st.median * 1.2, 0.5);
    for (int k = 4; k < options.restarts; ++k) {
        const double stretch = std::pow(1.5, k - 3);
        push_init(0.6 / stretch, st.median * 0.8, 1.2 * stretch);
    }
    inits.resize(std::min<std::size_t>(inits.size(), static_cast<std::size_t>(options.restarts)));

    std::vector<double> step;
    if (fit_xi0)
        step = {0.3 * st.median, 0.4, 0.3 * st.median, 0.4};
    else
        step = {0.4, 0.3 * st.median, 0.4};

    optim::NelderMeadOptions nm;
    nm.max_iters = options.max_iters;
    nm.x_tol = options.x_tol;
    nm.f_tol = options.f_tol;

    std::vector<optim::NelderMeadResult> runs(inits.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= inits.size())
                break;
            runs[i] = optim::nelder_mead(objective, inits[i], step, nm);
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(options.n_threads), inits.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    std::size_t best = 0;
    int total_iters = 0;
    bool any_converged = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        total_iters += runs[i].iterations;
        any_converged = any_converged || runs[i].converged;
        if (runs[i].fx < runs[best].fx)
            best = i;
    }

    FitResult result;
    result.params = decode(runs[best].x, fit_xi0, scale_floor);
    result.converged = runs[best].converged;
    result.iterations = total_iters;
    result.n_samples = samples.size();
    result.neg_log_likelihood = negative_log_likelihood(result.params, samples);

    if (!any_converged)
        throw convergence_error("fit_spread_params: no restart converged within " +
                                    std::to_string(options.max_iters) + " iterations",
                                result);

    // Observed-information standard errors on the free parameters, via
    // central differences of the surrogate in original parameter space
    // (offsets extended evenly through |.|, so the boundary at zero is
    // smooth).
    {
        const SpreadDistParams p0 = result.params;
        std::vector<double> center;
        std::vector<double> hs;
        if (fit_xi0) {
            center = {p0.xi0, p0.xi1, p0.kappa0, p0.kappa1};
            hs = {std::max(1e-3 * p0.xi0, 1e-4 * p0.xi1), 1e-3 * p0.xi1,
                  std::max(1e-3 * p0.kappa0, 1e-4 * p0.kappa1), 1e-3 * p0.kappa1};
        } else {
            center = {p0.xi1, p0.kappa0, p0.kappa1};
            hs = {1e-3 * p0.xi1, std::max(1e-3 * p0.kappa0, 1e-4 * p0.kappa1),
                  1e-3 * p0.kappa1};
        }
        const auto eval = [&](const std::vector<double>& v) {
            SpreadDistParams p;
            if (fit_xi0) {
                p.xi0 = std::abs(v[0]);
                p.xi1 = std::max(v[1], scale_floor);
                p.kappa0 = std::abs(v[2]);
                p.kappa1 = std::max(v[3], scale_floor);
            } else {
                p.xi0 = 0.0;
                p.xi1 = std::max(v[0], scale_floor);
                p.kappa0 = std::abs(v[1]);
                p.kappa1 = std::max(v[2], scale_floor);
            }
            return surrogate(p);
        };
        const std::size_t n = center.size();
        std::vector<double> hess(n * n, 0.0);
        const double f0 = eval(center);
        bool usable = std::isfinite(f0);
        for (std::size_t i = 0; i < n && usable; ++i) {
            auto vp = center, vm = center;
            vp[i] += hs[i];
            vm[i] -= hs[i];
            const double fp = eval(vp), fm = eval(vm);
            hess[i * n + i] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
            usable = std::isfinite(hess[i * n + i]);
        }
        for (std::size_t i = 0; i < n && usable; ++i)
            for (std::size_t j = i + 1; j < n && usable; ++j) {
                auto vpp = center, vpm = center, vmp = center, vmm = center;
                vpp[i] += hs[i];
                vpp[j] += hs[j];
                vpm[i] += hs[i];
                vpm[j] -= hs[j];
                vmp[i] -= hs[i];
                vmp[j] += hs[j];
                vmm[i] -= hs[i];
                vmm[j] -= hs[j];
                const double v =
                    (eval(vpp) - eval(vpm) - eval(vmp) + eval(vmm)) / (4.0 * hs[i] * hs[j]);
                hess[i * n + j] = hess[j * n + i] = v;
                usable = std::isfinite(v);
            }
        if (usable && cholesky(hess, n)) {
            const std::vector<double> diag = inverse_diagonal(hess, n);
            bool positive = true;
            for (double d : diag)
                positive = positive && d > 0.0;
            if (positive) {
                std::array<double, 4> se{std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0};
                if (fit_xi0) {
                    se = {std::sqrt(diag[0]), std::sqrt(diag[1]), std::sqrt(diag[2]),
                          std::sqrt(diag[3])};
                } else {
                    se[0] = std::numeric_limits<double>::quiet_NaN();
                    se[1] = std::sqrt(diag[0]);
                    se[2] = std::sqrt(diag[1]);
                    se[3] = std::sqrt(diag[2]);
                }
                result.std_errors = se;
            }
        }
    }

    // Symmetry: with both offsets consistent with zero the scale labels
    // are exchangeable; canonicalize xi1 <= kappa1 and report the twin.
    {
        const double k1max = std::max(result.params.xi1, result.params.kappa1);
        double k0_tol = 0.05 * k1max;
        if (result.std_errors)
            k0_tol = std::max(k0_tol, 2.0 * (*result.std_errors)[2]);
        const bool xi0_zeroish = result.params.xi0 <= 0.05 * k1max;
        if (result.params.kappa0 <= k0_tol && xi0_zeroish) {
            result.offset_symmetric = true;
            if (result.params.xi1 > result.params.kappa1) {
                std::swap(result.params.xi1, result.params.kappa1);
                std::swap(result.params.xi0, result.params.kappa0);
                if (result.std_errors) {
                    std::swap((*result.std_errors)[0], (*result.std_errors)[2]);
                    std::swap((*result.std_errors)[1], (*result.std_errors)[3]);
                }
            }
            SpreadDistParams twin = result.params;
            std::swap(twin.xi0, twin.kappa0);
            std::swap(twin.xi1, twin.kappa1);
            result.symmetric_twin = twin;
        }
    }

    return result;
}

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["xi0"] = params.xi0;
    j["xi1"] = params.xi1;
    j["kappa0"] = params.kappa0;
    j["kappa1"] = params.kappa1;
    j["nll"] = neg_log_likelihood;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["n_samples"] = n_samples;
    j["offset_symmetric"] = offset_symmetric;
    if (std_errors) {
        const auto& se = *std_errors;
        const char* names[4] = {"stderr_xi0", "stderr_xi1", "stderr_kappa0", "stderr_kappa1"};
        for (int i = 0; i < 4; ++i)
            if (!std::isnan(se[i]))
                j[names[i]] = se[i];
    }
    if (symmetric_twin) {
        j["twin_xi0"] = symmetric_twin->xi0;
        j["twin_xi1"] = symmetric_twin->xi1;
        j["twin_kappa0"] = symmetric_twin->kappa0;
        j["twin_kappa1"] = symmetric_twin->kappa1;
    }
    return j.dump(2) + "\n";
}

PhaseScaleResult fit_phase_scale(const PopulationHistogram& target, const ModelParams& base,
                                 std::span<const double> candidates,
                                 const PhaseScaleOptions& options) {
    base.validate();
    if (candidates.empty())
        throw invalid_input("fit_phase_scale: no candidate scales");
    for (double c : candidates)
        if (!(c > 0.0) || !std::isfinite(c))
            throw invalid_input("fit_phase_scale: candidates must be positive and finite");
    if (target.counts.size() != options.n_bins)
        throw invalid_input("fit_phase_scale: target histogram has " +
                            std::to_string(target.counts.size()) + " bins, options want " +
                            std::to_string(options.n_bins));
    if (target.total == 0)
        throw invalid_input("fit_phase_scale: target histogram is empty");

    const std::vector<double> target_frac = target.fractions();
    PhaseScaleResult result;
    double best_chi2 = kInf;
    for (double scale : candidates) {
        ModelParams p = base;
        p.rho = rho_from_phase_scale(options.mid0, p.dt, scale);
        const PopulationHistogram h = ensemble_population_histogram(
            p, options.n_trajectories, options.n_steps, options.n_bins, options.burn_in,
            options.seed, options.mid0);
        const double chi2 = stats::chi_squared_distance(target_frac, h.fractions());
        result.scores.emplace_back(scale, chi2);
        if (chi2 < best_chi2) {
            best_chi2 = chi2;
            result.best_scale = scale;
        }
    }
    return result;
}

} // namespace bidask
