#include "aggre/optimizer.hpp"

#include "aggre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aggre {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Evaluator {
    const Objective& f;
    OptimizerTrace& trace;

    double operator()(std::span<const double> x) {
        ++trace.evaluations;
        const double v = f(x);
        if (!std::isfinite(v)) {
            ++trace.failed_evaluations;
            return std::numeric_limits<double>::infinity();
        }
        return v;
    }
};

double diameter(const std::vector<std::vector<double>>& simplex) {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
        for (std::size_t j = 0; j < simplex[i].size(); ++j) d = std::max(d, std::abs(simplex[i][j] - simplex[0][j]));
    }
    return d;
}

// One simplex run starting at (x0, f0). Returns true on convergence.
bool run(Evaluator& eval, std::vector<double>& x_best, double& f_best, const OptimizerConfig& cfg,
         OptimizerTrace& trace) {
    const std::size_t n = x_best.size();
    std::vector<std::vector<double>> simplex(n + 1, x_best);
    std::vector<double> fv(n + 1, f_best);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += cfg.initial_step;
        fv[i + 1] = eval(simplex[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto point = [&](double coef, std::vector<double>& out, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
    };

    bool converged = false;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> s2(n + 1);
            std::vector<double> f2(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                s2[i] = std::move(simplex[order[i]]);
                f2[i] = fv[order[i]];
            }
            simplex = std::move(s2);
            fv = std::move(f2);
        }
        const double spread = fv[n] - fv[0];
        const double diam = diameter(simplex);
        trace.spread = spread;
        trace.diameter = diam;
        if (spread <= cfg.cost_rel_tol * std::abs(fv[0]) + cfg.cost_abs_tol &&
            (diam <= cfg.diameter_tol || spread == 0.0)) {
            converged = true;
            break;
        }
        ++trace.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        for (double& c : centroid) c /= static_cast<double>(n);

        point(kReflect, xr, simplex[n]);
        const double fr = eval(xr);
        if (fr < fv[0]) {
            point(kExpand, xe, simplex[n]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            point(outside ? kContract : -kContract, xc, simplex[n]);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + kShrink * (simplex[i][j] - simplex[0][j]);
                    fv[i] = eval(simplex[i]);
                }
            }
        }
        const auto best = std::min_element(fv.begin(), fv.end());
        trace.best_history.push_back(std::min(*best, f_best));
    }

    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    if (fv[best] < f_best) {
        f_best = fv[best];
        x_best = simplex[best];
    }
    return converged;
}

} // namespace

MinimizeResult minimize(const Objective& f, std::vector<double> x0, const OptimizerConfig& cfg) {
    if (x0.empty()) throw ValidationError("minimize: empty starting point");
    if (!(cfg.initial_step > 0.0)) throw ValidationError("minimize: initial_step must be positive");
    MinimizeResult res;
    Evaluator eval{f, res.trace};
    double f0 = eval(x0);
    if (!std::isfinite(f0)) throw ValidationError("minimize: objective is not finite at the starting point");
    res.x = std::move(x0);
    res.f = f0;
    res.trace.best_history.push_back(f0);

    bool converged = run(eval, res.x, res.f, cfg, res.trace);
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        const double before = res.f;
        ++res.trace.restarts_used;
        converged = run(eval, res.x, res.f, cfg, res.trace);
        // A restart that cannot improve confirms the optimum.
        if (converged && before - res.f <= cfg.cost_rel_tol * std::abs(res.f) + cfg.cost_abs_tol) break;
    }
    res.trace.converged = converged;
    return res;
}

} // namespace aggre
