#pragma once

// Asymptotic uncertainty of a GLS estimate:
//     F = chi^T W chi,  W = diag(M_k^(-2 gamma)),
//     sigma2_hat = 1/(n - p) sum_k M_k^(-2 gamma) (M_k - y_k)^2,
//     Sigma = sigma2_hat F^-1,  SE_k = sqrt(Sigma_kk),
// where chi_kj = dM(t_k)/dtheta_j over the free parameters.

#include "aggre/curve_model.hpp"
#include "aggre/estimator.hpp"
#include "aggre/model.hpp"
#include "aggre/observation.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace aggre {

struct FdConfig {
    double rel_step = 1e-4;  // h_j = rel_step * |theta_j|
};

struct SensitivityResult {
    Eigen::MatrixXd chi;             // n x (free parameter count)
    std::vector<Param> params;       // column order
    std::vector<std::string> notes;  // one-sided fallbacks
};

/// Central differences per free parameter; a failed side falls back to a
/// one-sided difference (recorded). Both sides failing throws NumericalError.
/// Columns are evaluated concurrently.
SensitivityResult sensitivity_matrix(const ModelParameters& theta, const FreeMask& mask, std::span<const double> t,
                                     const CurveModel& model, const FdConfig& cfg = {});

/// F = chi^T diag(M^(-2 gamma)) chi. Throws on nonpositive M when gamma > 0.
Eigen::MatrixXd fisher_matrix(const Eigen::MatrixXd& chi, std::span<const double> model, double gamma);

/// Throws ValidationError("insufficient degrees of freedom") when n <= kappa.
double sigma2_hat(std::span<const double> y, std::span<const double> model, double gamma, std::size_t kappa);

struct AsymptoticErrors {
    double condition = 0.0;     // sigma_max / sigma_min of F (inf when singular)
    bool invertible = false;    // condition <= cond_limit
    Eigen::MatrixXd covariance; // empty unless invertible
    std::vector<double> se;     // empty unless invertible
};

inline constexpr double kDefaultCondLimit = 1e12;

AsymptoticErrors asymptotic_errors(const Eigen::MatrixXd& F, double sigma2, double cond_limit = kDefaultCondLimit);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double normal_two_sided_quantile(double level);

/// theta_k +- z(level) SE_k. Throws for level outside (0,1) or mismatched sizes.
std::vector<Interval> confidence_intervals(std::span<const double> theta, std::span<const double> se, double level);

struct UncertaintyReport {
    std::vector<Param> params;
    std::vector<double> estimate;
    double gamma = 0.0;
    std::size_t n = 0;
    Eigen::MatrixXd chi;
    Eigen::MatrixXd fisher;
    double sigma2 = 0.0;
    AsymptoticErrors errors;
    double level = 0.95;
    std::vector<Interval> intervals;  // empty unless invertible
    std::vector<std::string> notes;
};

/// Full asymptotic analysis at a fitted estimate.
UncertaintyReport analyze_uncertainty(const FitResult& fit, const ObservationSet& obs, const CurveModel& model,
                                      const FdConfig& fd = {}, double level = 0.95,
                                      double cond_limit = kDefaultCondLimit);

} // namespace aggre
