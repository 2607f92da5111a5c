#pragma once

// Generalized least squares
//     J(theta) = (1/n) sum_k ((y_k - M(t_k; theta)) / M(t_k; theta)^gamma)^2
// minimized over the free coordinates of a mask. The weights use the model
// value at the current theta, not the data.

#include "aggre/curve_model.hpp"
#include "aggre/model.hpp"
#include "aggre/observation.hpp"
#include "aggre/optimizer.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aggre {

/// Cost from precomputed model values. Throws ValidationError for a length
/// mismatch or an empty set and NumericalError when gamma > 0 and some
/// M_k <= 0.
double gls_cost(std::span<const double> y, std::span<const double> model, double gamma);

/// Runs the model at theta. Forward failures are rethrown with theta attached.
double gls_cost(const ModelParameters& theta, const ObservationSet& obs, double gamma, const CurveModel& model);

enum class FitStatus { converged, not_converged };

struct FitOptions {
    OptimizerConfig optimizer;
    bool log_space = true;
};

struct FitResult {
    ModelParameters theta;
    FreeMask mask;
    double gamma = 0.0;
    double cost = 0.0;
    double initial_cost = 0.0;
    std::vector<double> model_values;  // M(t_k; theta)
    OptimizerTrace trace;
    FitStatus status = FitStatus::not_converged;
    std::vector<std::string> warnings;

    bool converged() const noexcept { return status == FitStatus::converged; }
};

/// Free-coordinate vector of theta (log-transformed when requested).
std::vector<double> pack(const ModelParameters& theta, const FreeMask& mask, bool log_space);
/// Writes the free coordinates of z into a copy of base.
ModelParameters unpack(std::span<const double> z, const ModelParameters& base, const FreeMask& mask, bool log_space);

/// Minimizes gls_cost over the free parameters starting at theta_init.
/// Parameter sets violating the model invariants, and forward failures, cost
/// +inf and are counted in trace.failed_evaluations.
FitResult fit(const ObservationSet& obs, const ModelParameters& theta_init, const FreeMask& mask, double gamma,
              const CurveModel& model, const FitOptions& options = {});

} // namespace aggre
