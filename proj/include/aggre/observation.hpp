#pragma once

// Observation data, the statistical observation model
//     y_k = M(t_k; theta0) + M(t_k; theta0)^gamma * eps_k,  eps_k ~ N(0, sigma^2),
// the truncation rule applied before fitting, weighted residuals and their
// diagnostics.

#include "aggre/curve_model.hpp"
#include "aggre/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace aggre {

struct SyntheticProvenance {
    std::uint64_t seed = 0;
    double gamma = 0.0;
    double sigma = 0.0;
    ModelParameters truth;
};

struct IngestedProvenance {
    std::string path;
};

using Provenance = std::variant<std::monostate, SyntheticProvenance, IngestedProvenance>;

struct TruncationRecord {
    double threshold = 0.12;
    double t_end = 8.0;
    double t_start = 0.0;             // first time the data exceed the threshold
    std::vector<std::size_t> kept;    // 0-based indices into the set before truncation
};

struct ObservationSet {
    std::vector<double> t;
    std::vector<double> y;
    Provenance provenance;
    std::optional<TruncationRecord> truncation;

    std::size_t size() const noexcept { return t.size(); }
    bool empty() const noexcept { return t.empty(); }
};

/// Builds a set after checking lengths, finiteness and strictly increasing t.
ObservationSet make_observations(std::vector<double> t, std::vector<double> y, Provenance provenance = {});

/// Seeded synthetic data. sigma = 0 gives the model curve exactly.
ObservationSet simulate_observations(const ModelParameters& truth, std::span<const double> t_grid, double gamma,
                                     double sigma, std::uint64_t seed, const CurveModel& model);

/// Keeps points with t in [t0, t_end] and y >= threshold, where t0 is the
/// first time y exceeds the threshold. Idempotent. Throws ValidationError when
/// nothing is left.
ObservationSet truncate_observations(const ObservationSet& obs, double threshold = 0.12, double t_end = 8.0);

/// Uniform grid of n points on [a, b] (both ends included).
std::vector<double> uniform_grid(double a, double b, std::size_t n);

struct ExcludedPoint {
    std::size_t index;
    std::string reason;
};

struct ResidualSeries {
    double gamma = 0.0;
    std::vector<std::size_t> index;  // position in the observation set
    std::vector<double> t;
    std::vector<double> r;           // (y - M) / M^gamma
    std::vector<double> model;       // M_k
    std::vector<ExcludedPoint> excluded;

    std::size_t size() const noexcept { return r.size(); }
};

/// Points with M_k <= 0 and gamma > 0 are excluded with a reason.
ResidualSeries residuals(const ObservationSet& obs, std::span<const double> model, double gamma);

struct ResidualDiagnostics {
    std::size_t n = 0;
    double lag1_autocorrelation = 0.0;
    double abs_model_correlation = 0.0;  // Pearson corr(|r|, M)
    double mean = 0.0;
    double variance = 0.0;               // 1/(n-1) normalization
    bool zero_variance = false;          // r (or |r|, or M) constant; correlations reported as 0
};

/// Needs at least 10 residuals.
ResidualDiagnostics residual_diagnostics(const ResidualSeries& r);

/// Pearson correlation; returns nullopt when either series is constant.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

} // namespace aggre
