#pragma once

// Nested-model comparison by the statistic
//     U = n (J_restricted - J_full) / J_full,
// asymptotically chi^2 with kappa_r degrees of freedom under the restricted
// hypothesis. Restrictions pin coordinates at fixed values.

#include "aggre/curve_model.hpp"
#include "aggre/estimator.hpp"
#include "aggre/model.hpp"
#include "aggre/observation.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace aggre {

struct NestedSpec {
    FreeMask full;
    FreeMask restricted;
    /// Values of the coordinates free in `full` but pinned in `restricted`.
    /// Missing values default to theta_init.
    std::vector<std::pair<Param, double>> pinned;

    std::size_t constraints() const noexcept { return full.count() - restricted.count(); }
    /// Throws ValidationError unless restricted is a strict subset of full.
    void validate() const;
};

struct StatisticValue {
    double value = 0.0;
    bool clamped = false;  // raw value was negative
    double raw = 0.0;
};

/// Throws ValidationError for J_full <= 0 or n == 0.
StatisticValue test_statistic(double J_restricted, double J_full, std::size_t n);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

/// P(X > u) for X ~ chi^2(df).
double chi_square_sf(double u, int df);
double chi_square_cdf(double u, int df);
/// tau with chi_square_sf(tau, df) = alpha.
double chi_square_threshold(double alpha, int df);

enum class Verdict { reject, do_not_reject };
std::string verdict_name(Verdict v);

struct ComparisonReport {
    double J_restricted = 0.0;
    double J_full = 0.0;
    std::size_t n = 0;
    double U = 0.0;
    bool clamped = false;
    int df = 1;
    double p_value = 1.0;
    double alpha = 0.05;
    double tau = 0.0;
    Verdict verdict = Verdict::do_not_reject;
    std::optional<FitResult> restricted_fit;
    std::optional<FitResult> full_fit;
    std::vector<std::string> warnings;
};

/// Decision from the two costs alone.
ComparisonReport compare_costs(double J_restricted, double J_full, std::size_t n, int df, double alpha);

/// Fits the restricted model from theta_init, then the full model from the
/// restricted optimum, and tests at level alpha.
ComparisonReport compare_nested(const ObservationSet& obs, const NestedSpec& spec, const ModelParameters& theta_init,
                                double gamma, double alpha, const CurveModel& model, const FitOptions& options = {});

} // namespace aggre
