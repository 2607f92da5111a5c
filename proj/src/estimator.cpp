#include "aggre/estimator.hpp"

#include "aggre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aggre {

namespace {

std::string describe(const ModelParameters& p) {
    std::ostringstream os;
    os.precision(10);
    os << "{";
    for (std::size_t i = 0; i < kParamCount; ++i) {
        os << (i ? ", " : "") << param_name(kAllParams[i]) << "=" << p.get(kAllParams[i]);
    }
    os << "}";
    return os.str();
}

} // namespace

double gls_cost(std::span<const double> y, std::span<const double> model, double gamma) {
    if (y.empty()) throw ValidationError("gls_cost: no observations");
    if (y.size() != model.size()) throw ValidationError("gls_cost: data and model differ in length");
    double sum = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double m = model[k];
        double r = y[k] - m;
        if (gamma != 0.0) {
            if (!(m > 0.0)) {
                std::ostringstream os;
                os << "gls_cost: model value " << m << " at index " << k << " cannot be weighted with gamma " << gamma;
                throw NumericalError(os.str());
            }
            r /= std::pow(m, gamma);
        }
        sum += r * r;
    }
    return sum / static_cast<double>(y.size());
}

double gls_cost(const ModelParameters& theta, const ObservationSet& obs, double gamma, const CurveModel& model) {
    std::vector<double> m;
    try {
        m = model(theta, obs.t);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at theta = " + describe(theta));
    }
    return gls_cost(obs.y, m, gamma);
}

std::vector<double> pack(const ModelParameters& theta, const FreeMask& mask, bool log_space) {
    std::vector<double> z;
    for (Param p : mask.free_params()) {
        const double v = theta.get(p);
        z.push_back(log_space ? std::log(v) : v);
    }
    return z;
}

ModelParameters unpack(std::span<const double> z, const ModelParameters& base, const FreeMask& mask, bool log_space) {
    ModelParameters out = base;
    const auto free = mask.free_params();
    if (z.size() != free.size()) throw ValidationError("unpack: coordinate count does not match the mask");
    for (std::size_t i = 0; i < free.size(); ++i) out.set(free[i], log_space ? std::exp(z[i]) : z[i]);
    return out;
}

FitResult fit(const ObservationSet& obs, const ModelParameters& theta_init, const FreeMask& mask, double gamma,
              const CurveModel& model, const FitOptions& options) {
    if (mask.count() == 0) throw ValidationError("fit: mask has no free parameter");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("fit: gamma must lie in [0,1]");
    if (obs.empty()) throw ValidationError("fit: no observations");
    require_valid(theta_init);
    for (Param p : mask.free_params()) {
        if (!(theta_init.get(p) > 0.0)) {
            throw ValidationError("fit: free parameter " + std::string(param_name(p)) + " must start positive");
        }
    }

    FitResult res;
    res.mask = mask;
    res.gamma = gamma;
    if (!obs.truncation) res.warnings.push_back("observations have not been truncated");

    const std::vector<double> z0 = pack(theta_init, mask, options.log_space);
    // exp(log(v)) need not return v; points equal to z0 map back to theta_init exactly.
    auto theta_at = [&](std::span<const double> z) {
        if (std::equal(z.begin(), z.end(), z0.begin(), z0.end())) return theta_init;
        return unpack(z, theta_init, mask, options.log_space);
    };
    const Objective objective = [&](std::span<const double> z) {
        const ModelParameters theta = theta_at(z);
        if (!validate_parameters(theta).ok()) return std::numeric_limits<double>::infinity();
        try {
            return gls_cost(theta, obs, gamma, model);
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    res.initial_cost = gls_cost(theta_init, obs, gamma, model);
    MinimizeResult mr = minimize(objective, z0, options.optimizer);
    res.theta = theta_at(mr.x);
    res.trace = std::move(mr.trace);
    res.status = res.trace.converged ? FitStatus::converged : FitStatus::not_converged;
    res.model_values = model(res.theta, obs.t);
    res.cost = gls_cost(obs.y, res.model_values, gamma);
    if (res.trace.failed_evaluations > 0) {
        res.warnings.push_back(std::to_string(res.trace.failed_evaluations) +
                               " objective evaluations failed and were penalized");
    }
    return res;
}

} // namespace aggre
