#pragma once

// Residual bootstrap for GLS estimates with nonconstant variance.
//
// Standardized residuals s_k = (y_k - M_k) / M_k^gamma at the base fit are
// resampled with replacement; replicate data y_k^m = M_k + M_k^gamma s_k^m are
// refitted with the base mask, gamma and optimizer settings starting from the
// base estimate. Sample statistics use the replicates that converged.

#include "aggre/curve_model.hpp"
#include "aggre/estimator.hpp"
#include "aggre/observation.hpp"
#include "aggre/uncertainty.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace aggre {

struct BootstrapSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // 1/(M-1) sum (theta^m - mean)(theta^m - mean)^T
    std::vector<double> se;
    double level = 0.95;
    std::vector<Interval> percentile;  // (1-level)/2 and (1+level)/2 sample quantiles
};

/// Throws ValidationError for fewer than two samples or ragged rows.
BootstrapSummary bootstrap_summary(const std::vector<std::vector<double>>& samples, double level = 0.95);

/// n indices drawn with replacement from the stream of replicate m; depends
/// on (seed, m) only.
std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, std::size_t m);

enum class ReplicateStatus { converged, not_converged, failed };

struct ReplicateOutcome {
    ReplicateStatus status = ReplicateStatus::failed;
    std::vector<double> theta;  // free parameters in mask order; empty when failed
    double cost = 0.0;
    std::string error;
};

struct BootstrapOptions {
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    double level = 0.95;
    FitOptions fit;
};

struct BootstrapResult {
    std::vector<Param> params;
    std::uint64_t seed = 0;
    std::size_t replicates = 0;
    std::vector<ReplicateOutcome> outcomes;   // indexed by replicate
    std::vector<std::vector<double>> samples; // converged replicates, in replicate order
    BootstrapSummary summary;
    std::vector<std::string> warnings;

    std::size_t converged() const noexcept { return samples.size(); }
};

/// Standardized residuals of the base fit.
std::vector<double> standardized_residuals(const ObservationSet& obs, const FitResult& base);

BootstrapResult bootstrap_estimate(const ObservationSet& obs, const FitResult& base, const CurveModel& model,
                                   const BootstrapOptions& options = {});

/// Same procedure with explicit resample index sets (one per replicate).
BootstrapResult bootstrap_from_indices(const ObservationSet& obs, const FitResult& base, const CurveModel& model,
                                       const std::vector<std::vector<std::size_t>>& indices,
                                       const FitOptions& fit_options = {}, double level = 0.95);

} // namespace aggre
