#include "aggre/bootstrap.hpp"

#include "aggre/errors.hpp"
#include "aggre/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace aggre {

namespace {

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace

BootstrapSummary bootstrap_summary(const std::vector<std::vector<double>>& samples, double level) {
    if (samples.size() < 2) throw ValidationError("bootstrap summary needs at least two samples");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("bootstrap summary: level must lie in (0,1)");
    const std::size_t p = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != p) throw ValidationError("bootstrap summary: samples differ in dimension");
    }
    const auto M = static_cast<double>(samples.size());
    BootstrapSummary out;
    out.level = level;
    out.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (const auto& s : samples) out.mean += Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(p));
    out.mean /= M;
    out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (const auto& s : samples) {
        const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(p)) - out.mean;
        out.covariance += d * d.transpose();
    }
    out.covariance /= (M - 1.0);
    out.se.resize(p);
    out.percentile.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        out.se[k] = std::sqrt(out.covariance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
        std::vector<double> col(samples.size());
        for (std::size_t m = 0; m < samples.size(); ++m) col[m] = samples[m][k];
        out.percentile[k] = {quantile(col, 0.5 * (1.0 - level)), quantile(col, 0.5 * (1.0 + level))};
    }
    return out;
}

std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, std::size_t m) {
    if (n == 0) throw ValidationError("resample: empty data set");
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(m & 0xffffffffu), static_cast<std::uint32_t>(m >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> idx(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

std::vector<double> standardized_residuals(const ObservationSet& obs, const FitResult& base) {
    if (base.model_values.size() != obs.size()) throw ValidationError("bootstrap: base fit does not match the data");
    std::vector<double> s(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const double m = base.model_values[k];
        if (base.gamma != 0.0 && !(m > 0.0)) throw NumericalError("bootstrap: nonpositive model value at the base fit");
        s[k] = (obs.y[k] - m) / (base.gamma == 0.0 ? 1.0 : std::pow(m, base.gamma));
    }
    return s;
}

BootstrapResult bootstrap_from_indices(const ObservationSet& obs, const FitResult& base, const CurveModel& model,
                                       const std::vector<std::vector<std::size_t>>& indices,
                                       const FitOptions& fit_options, double level) {
    if (indices.size() < 2) throw ValidationError("bootstrap needs at least two replicates");
    const std::vector<double> s = standardized_residuals(obs, base);
    const std::size_t n = obs.size();

    BootstrapResult res;
    res.params = base.mask.free_params();
    res.replicates = indices.size();
    res.outcomes.resize(indices.size());
    if (!base.converged()) res.warnings.push_back("base fit did not converge");

    parallel_for(indices.size(), [&](std::size_t m) {
        ReplicateOutcome& out = res.outcomes[m];
        try {
            const auto& idx = indices[m];
            if (idx.size() != n) throw ValidationError("bootstrap: resample must have n indices");
            ObservationSet rep = obs;
            for (std::size_t k = 0; k < n; ++k) {
                if (idx[k] >= n) throw ValidationError("bootstrap: resample index out of range");
                const double mk = base.model_values[k];
                rep.y[k] = mk + (base.gamma == 0.0 ? 1.0 : std::pow(mk, base.gamma)) * s[idx[k]];
            }
            const FitResult f = fit(rep, base.theta, base.mask, base.gamma, model, fit_options);
            for (Param p : res.params) out.theta.push_back(f.theta.get(p));
            out.cost = f.cost;
            out.status = f.converged() ? ReplicateStatus::converged : ReplicateStatus::not_converged;
        } catch (const std::exception& e) {
            out.status = ReplicateStatus::failed;
            out.theta.clear();
            out.error = e.what();
        }
    });

    std::size_t failed = 0, stalled = 0;
    for (const auto& o : res.outcomes) {
        if (o.status == ReplicateStatus::converged) res.samples.push_back(o.theta);
        else if (o.status == ReplicateStatus::failed) ++failed;
        else ++stalled;
    }
    if (res.samples.empty()) throw NumericalError("bootstrap: no replicate converged");
    if (failed) res.warnings.push_back(std::to_string(failed) + " replicates failed");
    if (stalled) res.warnings.push_back(std::to_string(stalled) + " replicates did not converge and were excluded");
    if (res.samples.size() >= 2) {
        res.summary = bootstrap_summary(res.samples, level);
    } else {
        res.warnings.push_back("fewer than two converged replicates; no summary");
    }
    return res;
}

BootstrapResult bootstrap_estimate(const ObservationSet& obs, const FitResult& base, const CurveModel& model,
                                   const BootstrapOptions& options) {
    if (options.replicates < 2) throw ValidationError("bootstrap needs M >= 2");
    std::vector<std::vector<std::size_t>> indices(options.replicates);
    for (std::size_t m = 0; m < options.replicates; ++m) indices[m] = resample_indices(obs.size(), options.seed, m);
    BootstrapResult res = bootstrap_from_indices(obs, base, model, indices, options.fit, options.level);
    res.seed = options.seed;
    return res;
}

} // namespace aggre
