// Acceptance checks. Prints one line per criterion:
//   criterion <k> PASS|FAIL <name>: <details>
// Usage: aggre_acceptance [k ...]   (no arguments runs all twelve)
// Exit status is the number of failed criteria.

#include "aggre/bootstrap.hpp"
#include "aggre/comparison.hpp"
#include "aggre/curve_model.hpp"
#include "aggre/errors.hpp"
#include "aggre/estimator.hpp"
#include "aggre/forward.hpp"
#include "aggre/observation.hpp"
#include "aggre/parallel.hpp"
#include "aggre/uncertainty.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace aggre;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Reference truth: three fitted rates from a published fit, other
// parameters at their defaults.
ModelParameters reference_truth() {
    ModelParameters p;
    p.kI_plus = 2.181;
    p.kI_minus = 11.090;
    p.koff_N = 90.536;
    return p;
}

constexpr double kSigma = 0.00253;  // sigma^2 = 6.4e-6
constexpr double kGamma = 0.6;
constexpr std::size_t kGridPoints = 1645;  // about 699 points survive truncation

ObservationSet reference_data(const ModelParameters& truth, std::uint64_t seed, const CurveModel& model) {
    const auto grid = uniform_grid(0.0, 8.0, kGridPoints);
    return truncate_observations(simulate_observations(truth, grid, kGamma, kSigma, seed, model));
}

const FreeMask kThree{Param::kI_plus, Param::kI_minus, Param::koff_N};
const FreeMask kTwo{Param::kI_plus, Param::kI_minus};

Outcome statistic_arithmetic() {
    const auto r = compare_costs(0.0044192109, 0.0043709501, 699, 1, 0.01);
    const bool pass = std::abs(r.U - 7.7178) <= 0.0005 && r.verdict == Verdict::reject;
    return {pass, fmt("U=%.4f tau(0.01)=%.4f verdict=%s", r.U, r.tau, verdict_name(r.verdict).c_str())};
}

Outcome threshold_table() {
    const std::pair<double, double> table[] = {{1.32, 0.25}, {2.71, 0.10}, {3.84, 0.05}, {6.63, 0.01}, {10.83, 0.001}};
    double worst = 0.0;
    std::string d;
    for (auto [tau, alpha] : table) {
        const double sf = chi_square_sf(tau, 1);
        worst = std::max(worst, std::abs(sf - alpha));
        d += fmt("sf(%.2f)=%.5f ", tau, sf);
    }
    return {worst <= 0.002, d + fmt("max gap %.2e", worst)};
}

Outcome mass_conservation() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logf(std::log(0.5), std::log(2.0));
    std::vector<double> t;
    for (int k = 0; k <= 16; ++k) t.push_back(0.5 * k);
    double worst = 0.0;
    int draws = 0, rejected = 0;
    while (draws < 50) {
        ModelParameters p;
        for (Param q : kAllParams) p.set(q, p.get(q) * std::exp(logf(rng)));
        if (!validate_parameters(p).ok()) {
            ++rejected;
            continue;
        }
        ForwardSettings fs;
        fs.solver.store_states = true;
        worst = std::max(worst, conservation_residual(solve_forward(p, t, fs)));
        ++draws;
    }
    return {worst <= 1e-8, fmt("50 draws (%d invalid redrawn), max residual %.2e", rejected, worst)};
}

Outcome exchange_equilibrium() {
    ModelParameters p;
    p.kon_N = 0.0;
    const std::vector<double> t{8.0};
    const auto tr = solve_forward(p, t);
    const double ratio = tr.points.back().V_star / tr.points.back().V;
    const double expected = p.kI_plus / p.kI_minus;
    const double rel = std::abs(ratio / expected - 1.0);
    return {rel <= 1e-3, fmt("V*/V=%.8f kI+/kI-=%.8f rel %.2e", ratio, expected, rel)};
}

Outcome oracle_equivalence() {
    ModelParameters p;
    p.i_max = 2000;
    std::vector<double> t;
    for (int k = 1; k <= 32; ++k) t.push_back(0.25 * k);
    const auto ref = oracle::truncated_ode_m(p, 2000, t);
    double top = 0.0;
    for (double v : ref) top = std::max(top, v);
    bool pass = top > 0.05;
    std::string d = fmt("max m %.3f;", top);
    for (Scheme s : {Scheme::upwind, Scheme::lax_wendroff, Scheme::flux_limiter}) {
        ForwardSettings fs;
        fs.scheme = s;
        const auto m = polymerized_fraction(p, t, fs);
        double sup = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) sup = std::max(sup, std::abs(m[k] - ref[k]));
        pass = pass && sup / top <= 0.02;
        d += fmt(" %s sup %.2e (%.2f%%)", std::string(scheme_name(s)).c_str(), sup, 100.0 * sup / top);
    }
    return {pass, d};
}

Outcome scheme_order() {
    const double h = 0.01;
    auto order = [&](Scheme s) {
        const double coarse = oracle::manufactured_error(s, 1.0 - std::exp(-h));
        const double fine = oracle::manufactured_error(s, 1.0 - std::exp(-0.5 * h));
        return std::log2(coarse / fine);
    };
    const double up = order(Scheme::upwind);
    const double lw = order(Scheme::lax_wendroff);
    const double fl = order(Scheme::flux_limiter);
    return {up >= 0.8 && lw >= 1.7, fmt("upwind %.3f, lax_wendroff %.3f, flux_limiter %.3f", up, lw, fl)};
}

Outcome estimator_recovery() {
    const auto model = forward_curve();
    const auto truth = reference_truth();
    const std::size_t seeds = 20;
    std::vector<int> covered(seeds, 0);
    std::vector<double> s2(seeds, 0.0), n(seeds, 0.0), worst(seeds, 0.0);
    parallel_for(seeds, [&](std::size_t i) {
        const auto obs = reference_data(truth, 100 + i, model);
        const auto f = fit(obs, ModelParameters{}, kThree, kGamma, model);
        const auto u = analyze_uncertainty(f, obs, model);
        n[i] = static_cast<double>(obs.size());
        s2[i] = u.sigma2;
        if (!f.converged() || !u.errors.invertible) return;
        bool ok = true;
        for (std::size_t k = 0; k < u.params.size(); ++k) {
            const double z = std::abs(u.estimate[k] - truth.get(u.params[k])) / u.errors.se[k];
            worst[i] = std::max(worst[i], z);
            ok = ok && z <= 3.0;
        }
        covered[i] = ok;
    });
    int hits = 0;
    double mean_s2 = 0.0, mean_n = 0.0, max_z = 0.0;
    for (std::size_t i = 0; i < seeds; ++i) {
        hits += covered[i];
        mean_s2 += s2[i] / seeds;
        mean_n += n[i] / seeds;
        max_z = std::max(max_z, worst[i]);
    }
    return {hits >= 18, fmt("%d/20 replicates within 3 SE (max |z| %.2f), mean n %.1f, mean sigma2_hat %.3e", hits,
                            max_z, mean_n, mean_s2)};
}

Outcome bootstrap_agreement() {
    const auto model = forward_curve();
    const auto truth = reference_truth();
    const auto obs = reference_data(truth, 7, model);
    const auto base = fit(obs, truth, kTwo, kGamma, model);
    const auto u = analyze_uncertainty(base, obs, model);
    if (!u.errors.invertible) return {false, "asymptotic covariance refused"};
    BootstrapOptions opt;
    opt.replicates = 1000;
    opt.seed = 1;
    const auto b = bootstrap_estimate(obs, base, model, opt);
    bool pass = true;
    std::string d = fmt("%zu/1000 converged;", b.converged());
    for (std::size_t k = 0; k < u.params.size(); ++k) {
        const double rel = b.summary.se[k] / u.errors.se[k] - 1.0;
        pass = pass && std::abs(rel) <= 0.25;
        d += fmt(" %s boot %.4g asym %.4g (%+.1f%%)", std::string(param_name(u.params[k])).c_str(), b.summary.se[k],
                 u.errors.se[k], 100.0 * rel);
    }
    return {pass, d};
}

Outcome residual_discrimination() {
    const auto model = forward_curve();
    const auto truth = reference_truth();
    const auto grid = uniform_grid(0.1, 8.0, 400);
    const std::size_t seeds = 20;
    std::vector<double> matched(seeds, 1.0), ols(seeds, 0.0);
    parallel_for(seeds, [&](std::size_t i) {
        const auto obs = simulate_observations(truth, grid, 1.0, 0.03, 500 + i, model);
        for (double g : {1.0, 0.0}) {
            const auto f = fit(obs, truth, kThree, g, model);
            const auto d = residual_diagnostics(residuals(obs, f.model_values, g));
            (g == 1.0 ? matched : ols)[i] = d.abs_model_correlation;
        }
    });
    int good = 0;
    double worst_matched = 0.0, worst_ols = 1.0;
    for (std::size_t i = 0; i < seeds; ++i) {
        good += std::abs(matched[i]) < 0.15 && ols[i] > 0.5;
        worst_matched = std::max(worst_matched, std::abs(matched[i]));
        worst_ols = std::min(worst_ols, ols[i]);
    }
    return {good >= 18, fmt("%d/20 seeds discriminate; max |corr| matched %.3f, min corr gamma=0 %.3f", good,
                            worst_matched, worst_ols)};
}

Outcome null_calibration() {
    const auto model = forward_curve();
    const auto truth = reference_truth();
    const NestedSpec spec{{Param::kI_plus, Param::kI_minus, Param::kon_N}, kTwo, {}};
    const std::size_t reps = 200;
    std::vector<double> U(reps, -1.0);
    parallel_for(reps, [&](std::size_t i) {
        try {
            const auto obs = reference_data(truth, 1000 + i, model);
            U[i] = compare_nested(obs, spec, truth, kGamma, 0.05, model).U;
        } catch (const std::exception&) {
        }
    });
    int done = 0, rejected = 0;
    double mean = 0.0;
    for (double u : U) {
        if (u < 0.0) continue;
        ++done;
        rejected += u > 3.84;
        mean += u;
    }
    if (done == 0) return {false, "no replicate completed"};
    const double rate = static_cast<double>(rejected) / done;
    return {done == static_cast<int>(reps) && rate >= 0.02 && rate <= 0.10,
            fmt("%d/%zu completed, rejection rate %.3f at tau=3.84, mean U %.3f", done, reps, rate, mean / done)};
}

Outcome ill_conditioning() {
    const auto model = forward_curve();
    const auto obs = reference_data(reference_truth(), 1, model);
    auto f = fit(obs, ModelParameters{}, kThree, kGamma, model);
    f.mask = FreeMask::all();
    const auto u = analyze_uncertainty(f, obs, model);
    const bool pass = u.errors.condition >= 1e8 && !u.errors.invertible && u.errors.se.empty();
    std::string flat;
    for (Eigen::Index j = 0; j < u.chi.cols(); ++j)
        if (u.chi.col(j).cwiseAbs().maxCoeff() == 0.0) flat += " " + std::string(param_name(u.params[j]));
    return {pass, fmt("kappa(F)=%.3e, standard errors %s, zero sensitivity columns:%s", u.errors.condition,
                      u.errors.invertible ? "reported" : "refused", flat.empty() ? " none" : flat.c_str())};
}

Outcome supported_set() {
    const auto model = forward_curve();
    const auto obs = reference_data(reference_truth(), 1, model);
    const ModelParameters init;
    const NestedSpec add_koff{kThree, kTwo, {}};
    const NestedSpec add_kon{{Param::kI_plus, Param::kI_minus, Param::kon_N}, kTwo, {}};
    const auto a = compare_nested(obs, add_koff, init, kGamma, 0.01, model);
    const auto b = compare_nested(obs, add_kon, init, kGamma, 0.01, model);
    const bool pass = a.verdict == Verdict::reject && b.verdict == Verdict::do_not_reject;
    return {pass, fmt("+koff_N: U=%.3f %s; +kon_N: U=%.3f %s (tau=%.3f, n=%zu)", a.U, verdict_name(a.verdict).c_str(),
                      b.U, verdict_name(b.verdict).c_str(), a.tau, a.n)};
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"comparison statistic arithmetic", statistic_arithmetic},
        {"chi-square threshold table", threshold_table},
        {"mass conservation", mass_conservation},
        {"exchange equilibrium", exchange_equilibrium},
        {"solver oracle equivalence", oracle_equivalence},
        {"scheme order", scheme_order},
        {"estimator recovery", estimator_recovery},
        {"bootstrap-asymptotic agreement", bootstrap_agreement},
        {"residual diagnostic discrimination", residual_discrimination},
        {"null calibration of the nested test", null_calibration},
        {"ill-conditioning of the full Fisher matrix", ill_conditioning},
        {"supported parameter set", supported_set},
    };
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(all.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
            return 64;
        }
        which.push_back(k);
    }
    if (which.empty())
        for (int k = 1; k <= static_cast<int>(all.size()); ++k) which.push_back(k);

    int failed = 0;
    for (int k : which) {
        const auto& c = all[static_cast<std::size_t>(k - 1)];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        const std::string line = fmt("criterion %d %s %s: %s [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", c.name,
                                     o.detail.c_str(), secs);
        std::fputs(line.c_str(), stdout);
        std::fflush(stdout);
        // Optional append-only record, since ctest hides the output of passing tests.
        if (const char* path = std::getenv("AGGRE_ACCEPTANCE_LOG")) {
            if (std::FILE* f = std::fopen(path, "a")) {
                std::fputs(line.c_str(), f);
                std::fclose(f);
            }
        }
    }
    return failed;
}
