#include "aggre/observation.hpp"

#include "aggre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace aggre {

ObservationSet make_observations(std::vector<double> t, std::vector<double> y, Provenance provenance) {
    if (t.size() != y.size()) throw ValidationError("observations: t and y differ in length");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!std::isfinite(t[k]) || !std::isfinite(y[k])) {
            std::ostringstream os;
            os << "observations: non-finite value at index " << k;
            throw ValidationError(os.str());
        }
        if (k > 0 && !(t[k] > t[k - 1])) {
            std::ostringstream os;
            os << "observations: times must be strictly increasing (index " << k << ", t = " << t[k] << ")";
            throw ValidationError(os.str());
        }
    }
    ObservationSet obs;
    obs.t = std::move(t);
    obs.y = std::move(y);
    obs.provenance = std::move(provenance);
    return obs;
}

ObservationSet simulate_observations(const ModelParameters& truth, std::span<const double> t_grid, double gamma,
                                     double sigma, std::uint64_t seed, const CurveModel& model) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("simulate: gamma must lie in [0,1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("simulate: sigma must be >= 0");
    const std::vector<double> m = model(truth, t_grid);
    if (m.size() != t_grid.size()) throw NumericalError("simulate: model returned the wrong number of values");

    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> y(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double eps = sigma * noise(rng);
        const double scale = gamma == 0.0 ? 1.0 : std::pow(std::max(m[k], 0.0), gamma);
        y[k] = m[k] + scale * eps;
    }
    return make_observations(std::vector<double>(t_grid.begin(), t_grid.end()), std::move(y),
                             SyntheticProvenance{seed, gamma, sigma, truth});
}

ObservationSet truncate_observations(const ObservationSet& obs, double threshold, double t_end) {
    const auto first = std::find_if(obs.y.begin(), obs.y.end(), [&](double v) { return v > threshold; });
    if (first == obs.y.end()) {
        std::ostringstream os;
        os << "truncation: no observation exceeds the threshold " << threshold;
        throw ValidationError(os.str());
    }
    const double t0 = obs.t[static_cast<std::size_t>(first - obs.y.begin())];

    TruncationRecord rec;
    rec.threshold = threshold;
    rec.t_end = t_end;
    rec.t_start = t0;
    ObservationSet out;
    out.provenance = obs.provenance;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        if (obs.t[k] >= t0 && obs.t[k] <= t_end && obs.y[k] >= threshold) {
            // Indices always refer to the original, untruncated set.
            rec.kept.push_back(obs.truncation ? obs.truncation->kept[k] : k);
            out.t.push_back(obs.t[k]);
            out.y.push_back(obs.y[k]);
        }
    }
    if (out.empty()) throw ValidationError("truncation: no observation left in [t0, t_end]");
    out.truncation = std::move(rec);
    return out;
}

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    if (n < 2 || !(b > a)) throw ValidationError("uniform_grid: need n >= 2 and b > a");
    std::vector<double> g(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) g[k] = a + h * static_cast<double>(k);
    g.back() = b;
    return g;
}

ResidualSeries residuals(const ObservationSet& obs, std::span<const double> model, double gamma) {
    if (model.size() != obs.size()) throw ValidationError("residuals: model values and observations differ in length");
    ResidualSeries s;
    s.gamma = gamma;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const double m = model[k];
        if (gamma > 0.0 && !(m > 0.0)) {
            std::ostringstream os;
            os << "model value " << m << " at t = " << obs.t[k] << " cannot carry weight M^" << gamma;
            s.excluded.push_back({k, os.str()});
            continue;
        }
        const double w = gamma == 0.0 ? 1.0 : std::pow(m, gamma);
        s.index.push_back(k);
        s.t.push_back(obs.t[k]);
        s.r.push_back((obs.y[k] - m) / w);
        s.model.push_back(m);
    }
    return s;
}

namespace {

// Exact test; the mean-subtracted sum of squares of a constant series is
// not always exactly zero in floating point.
bool constant(std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

} // namespace

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) return std::nullopt;
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double da = a[k] - ma, db = b[k] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0) || constant(a) || constant(b)) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

ResidualDiagnostics residual_diagnostics(const ResidualSeries& r) {
    const std::size_t n = r.size();
    if (n < 10) throw ValidationError("residual diagnostics need at least 10 residuals");
    ResidualDiagnostics d;
    d.n = n;
    for (double v : r.r) d.mean += v;
    d.mean /= static_cast<double>(n);
    double ss = 0.0;
    if (!constant(r.r)) {
        for (double v : r.r) ss += (v - d.mean) * (v - d.mean);
    }
    d.variance = ss / static_cast<double>(n - 1);

    if (ss > 0.0) {
        double num = 0.0;
        for (std::size_t k = 1; k < n; ++k) num += (r.r[k] - d.mean) * (r.r[k - 1] - d.mean);
        d.lag1_autocorrelation = num / ss;
    } else {
        d.zero_variance = true;
    }

    std::vector<double> abs_r(n);
    std::transform(r.r.begin(), r.r.end(), abs_r.begin(), [](double v) { return std::abs(v); });
    if (auto c = pearson(abs_r, r.model)) {
        d.abs_model_correlation = *c;
    } else {
        d.zero_variance = true;
    }
    return d;
}

} // namespace aggre
