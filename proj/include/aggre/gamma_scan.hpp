#pragma once

// Fits the same data under several weighting exponents and compares the
// residual diagnostics; the recommended gamma minimizes |corr(|r|, M)|.

#include "aggre/curve_model.hpp"
#include "aggre/estimator.hpp"
#include "aggre/observation.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aggre {

struct GammaScanRow {
    double gamma = 0.0;
    bool ok = false;
    std::string error;
    std::optional<FitResult> fit;
    ResidualSeries residuals;
    ResidualDiagnostics diagnostics;
};

struct GammaScanResult {
    std::vector<GammaScanRow> rows;
    std::optional<double> recommended;  // none when every row failed
};

/// Rows are evaluated concurrently; a failing gamma is flagged and the scan
/// continues.
GammaScanResult gamma_scan(const ObservationSet& obs, const ModelParameters& theta_init, const FreeMask& mask,
                           std::span<const double> gammas, const CurveModel& model, const FitOptions& options = {});

} // namespace aggre
