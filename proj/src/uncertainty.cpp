#include "aggre/uncertainty.hpp"

#include "aggre/errors.hpp"
#include "aggre/parallel.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace aggre {

SensitivityResult sensitivity_matrix(const ModelParameters& theta, const FreeMask& mask, std::span<const double> t,
                                     const CurveModel& model, const FdConfig& cfg) {
    if (!(cfg.rel_step > 0.0)) throw ValidationError("sensitivity: rel_step must be positive");
    SensitivityResult res;
    res.params = mask.free_params();
    const std::size_t n = t.size();
    const std::size_t p = res.params.size();
    res.chi.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));

    // Base values are only needed for one-sided fallbacks.
    std::optional<std::vector<double>> base;
    std::vector<std::string> notes(p);
    std::vector<int> need_base(p, 0);
    std::vector<std::vector<double>> plus(p), minus(p);
    std::vector<double> step(p);

    auto try_eval = [&](const ModelParameters& q) -> std::optional<std::vector<double>> {
        if (!validate_parameters(q).ok()) return std::nullopt;
        try {
            return model(q, t);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
    };

    parallel_for(2 * p, [&](std::size_t job) {
        const std::size_t j = job / 2;
        const bool up = job % 2 == 0;
        const Param par = res.params[j];
        const double v = theta.get(par);
        const double h = cfg.rel_step * std::abs(v);
        step[j] = h;
        ModelParameters q = theta;
        q.set(par, up ? v + h : v - h);
        auto r = try_eval(q);
        (up ? plus[j] : minus[j]) = r ? std::move(*r) : std::vector<double>{};
    });

    for (std::size_t j = 0; j < p; ++j) {
        const bool has_plus = !plus[j].empty();
        const bool has_minus = !minus[j].empty();
        const double h = step[j];
        if (!(h > 0.0)) throw ValidationError("sensitivity: parameter " + std::string(param_name(res.params[j])) + " is zero");
        if (!has_plus && !has_minus) {
            throw NumericalError("sensitivity: forward model failed on both sides of " +
                                 std::string(param_name(res.params[j])));
        }
        if (has_plus && has_minus) {
            for (std::size_t k = 0; k < n; ++k)
                res.chi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = (plus[j][k] - minus[j][k]) / (2.0 * h);
            continue;
        }
        if (!base) base = model(theta, t);
        const auto& other = has_plus ? plus[j] : minus[j];
        const double sign = has_plus ? 1.0 : -1.0;
        for (std::size_t k = 0; k < n; ++k)
            res.chi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = sign * (other[k] - (*base)[k]) / h;
        res.notes.push_back(std::string(param_name(res.params[j])) + ": " + (has_plus ? "forward" : "backward") +
                            " difference used, the other side failed");
    }
    return res;
}

Eigen::MatrixXd fisher_matrix(const Eigen::MatrixXd& chi, std::span<const double> model, double gamma) {
    if (static_cast<std::size_t>(chi.rows()) != model.size()) throw ValidationError("fisher: chi rows do not match model values");
    Eigen::VectorXd w(chi.rows());
    for (Eigen::Index k = 0; k < chi.rows(); ++k) {
        const double m = model[static_cast<std::size_t>(k)];
        if (gamma != 0.0 && !(m > 0.0)) {
            std::ostringstream os;
            os << "fisher: nonpositive model value " << m << " at index " << k;
            throw ValidationError(os.str());
        }
        w(k) = gamma == 0.0 ? 1.0 : std::pow(m, -2.0 * gamma);
    }
    Eigen::MatrixXd F = chi.transpose() * w.asDiagonal() * chi;
    // Symmetrize the rounding.
    return 0.5 * (F + F.transpose());
}

double sigma2_hat(std::span<const double> y, std::span<const double> model, double gamma, std::size_t kappa) {
    if (y.size() != model.size()) throw ValidationError("sigma2_hat: data and model differ in length");
    if (y.size() <= kappa) throw ValidationError("insufficient degrees of freedom");
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double m = model[k];
        if (gamma != 0.0 && !(m > 0.0)) throw ValidationError("sigma2_hat: nonpositive model value");
        const double w = gamma == 0.0 ? 1.0 : std::pow(m, -2.0 * gamma);
        s += w * (m - y[k]) * (m - y[k]);
    }
    return s / static_cast<double>(y.size() - kappa);
}

AsymptoticErrors asymptotic_errors(const Eigen::MatrixXd& F, double sigma2, double cond_limit) {
    if (F.rows() != F.cols() || F.rows() == 0) throw ValidationError("asymptotic_errors: F must be square and nonempty");
    AsymptoticErrors out;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    out.invertible = std::isfinite(out.condition) && out.condition <= cond_limit;
    if (!out.invertible) return out;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(F);
    const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(F.rows(), F.cols()));
    out.covariance = sigma2 * 0.5 * (inv + inv.transpose());
    out.se.resize(static_cast<std::size_t>(F.rows()));
    for (Eigen::Index k = 0; k < F.rows(); ++k) out.se[static_cast<std::size_t>(k)] = std::sqrt(std::max(out.covariance(k, k), 0.0));
    return out;
}

double normal_two_sided_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0,1)");
    return std::sqrt(2.0) * boost::math::erf_inv(level);
}

std::vector<Interval> confidence_intervals(std::span<const double> theta, std::span<const double> se, double level) {
    const double z = normal_two_sided_quantile(level);
    if (theta.size() != se.size()) throw ValidationError("confidence_intervals: estimate and SE differ in length");
    std::vector<Interval> out(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) out[k] = {theta[k] - z * se[k], theta[k] + z * se[k]};
    return out;
}

UncertaintyReport analyze_uncertainty(const FitResult& fit, const ObservationSet& obs, const CurveModel& model,
                                      const FdConfig& fd, double level, double cond_limit) {
    UncertaintyReport rep;
    rep.params = fit.mask.free_params();
    for (Param p : rep.params) rep.estimate.push_back(fit.theta.get(p));
    rep.gamma = fit.gamma;
    rep.n = obs.size();
    rep.level = level;
    auto sens = sensitivity_matrix(fit.theta, fit.mask, obs.t, model, fd);
    rep.chi = std::move(sens.chi);
    rep.notes = std::move(sens.notes);
    const std::vector<double> m = fit.model_values.size() == obs.size() ? fit.model_values : model(fit.theta, obs.t);
    rep.fisher = fisher_matrix(rep.chi, m, fit.gamma);
    rep.sigma2 = sigma2_hat(obs.y, m, fit.gamma, rep.params.size());
    rep.errors = asymptotic_errors(rep.fisher, rep.sigma2, cond_limit);
    if (rep.errors.invertible) {
        rep.intervals = confidence_intervals(rep.estimate, rep.errors.se, level);
    } else {
        std::ostringstream os;
        os << "condition number " << rep.errors.condition << " exceeds " << cond_limit
           << "; standard errors not computed";
        rep.notes.push_back(os.str());
    }
    return rep;
}

} // namespace aggre
