#include "aggre/comparison.hpp"

#include "aggre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aggre {

void NestedSpec::validate() const {
    if (!restricted.subset_of(full) || restricted.count() >= full.count()) {
        throw ValidationError("nested spec: restricted free set must be a strict subset of the full free set");
    }
    if (restricted.count() == 0) throw ValidationError("nested spec: restricted model has no free parameter");
    for (const auto& [p, v] : pinned) {
        if (!full.is_free(p) || restricted.is_free(p)) {
            throw ValidationError("nested spec: pinned parameter " + std::string(param_name(p)) +
                                  " must be free only in the full model");
        }
    }
}

StatisticValue test_statistic(double J_restricted, double J_full, std::size_t n) {
    if (!(J_full > 0.0)) throw ValidationError("test statistic: J_full must be positive");
    if (n == 0) throw ValidationError("test statistic: n must be >= 1");
    StatisticValue s;
    s.raw = static_cast<double>(n) * (J_restricted - J_full) / J_full;
    s.clamped = s.raw < 0.0;
    s.value = s.clamped ? 0.0 : s.raw;
    return s;
}

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 10000;

// Lower regularized gamma P(a, x) by its power series (x < a + 1).
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < kMaxTerms; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by Lentz's continued fraction (x >= a + 1).
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_df(int df) {
    if (df < 1) throw ValidationError("chi-square: degrees of freedom must be >= 1");
}

} // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw ValidationError("incomplete gamma: a must be positive");
    if (!(x >= 0.0)) throw ValidationError("incomplete gamma: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi_square_sf(double u, int df) {
    check_df(df);
    if (!(u >= 0.0)) throw ValidationError("chi-square: u must be >= 0");
    return regularized_gamma_q(0.5 * df, 0.5 * u);
}

double chi_square_cdf(double u, int df) {
    check_df(df);
    if (!(u >= 0.0)) throw ValidationError("chi-square: u must be >= 0");
    const double a = 0.5 * df, x = 0.5 * u;
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double chi_square_threshold(double alpha, int df) {
    check_df(df);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("chi-square threshold: alpha must lie in (0,1)");
    // sf is strictly decreasing: bracket, then bisect.
    double lo = 0.0, hi = std::max(1.0, static_cast<double>(df));
    while (chi_square_sf(hi, df) > alpha) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi_square_sf(mid, df) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string verdict_name(Verdict v) { return v == Verdict::reject ? "reject" : "do-not-reject"; }

ComparisonReport compare_costs(double J_restricted, double J_full, std::size_t n, int df, double alpha) {
    ComparisonReport rep;
    rep.J_restricted = J_restricted;
    rep.J_full = J_full;
    rep.n = n;
    rep.df = df;
    rep.alpha = alpha;
    const StatisticValue s = test_statistic(J_restricted, J_full, n);
    rep.U = s.value;
    rep.clamped = s.clamped;
    if (s.clamped) {
        std::ostringstream os;
        os << "negative statistic " << s.raw << " clamped to 0 (restricted fit cheaper than full fit)";
        rep.warnings.push_back(os.str());
    }
    rep.p_value = chi_square_sf(rep.U, df);
    rep.tau = chi_square_threshold(alpha, df);
    rep.verdict = rep.U > rep.tau ? Verdict::reject : Verdict::do_not_reject;
    return rep;
}

ComparisonReport compare_nested(const ObservationSet& obs, const NestedSpec& spec, const ModelParameters& theta_init,
                                double gamma, double alpha, const CurveModel& model, const FitOptions& options) {
    spec.validate();
    ModelParameters start = theta_init;
    for (const auto& [p, v] : spec.pinned) start.set(p, v);

    FitResult restricted = fit(obs, start, spec.restricted, gamma, model, options);
    FitResult full;
    try {
        full = fit(obs, restricted.theta, spec.full, gamma, model, options);
    } catch (const ValidationError& e) {
        std::ostringstream os;
        os << "full fit failed after the restricted fit reached J = " << restricted.cost << ": " << e.what();
        throw ValidationError(os.str());
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << "full fit failed after the restricted fit reached J = " << restricted.cost << ": " << e.what();
        throw NumericalError(os.str());
    }
    ComparisonReport rep =
        compare_costs(restricted.cost, full.cost, obs.size(), static_cast<int>(spec.constraints()), alpha);
    if (!restricted.converged()) rep.warnings.push_back("restricted fit did not converge");
    if (!full.converged()) rep.warnings.push_back("full fit did not converge");
    rep.restricted_fit = std::move(restricted);
    rep.full_fit = std::move(full);
    return rep;
}

} // namespace aggre
