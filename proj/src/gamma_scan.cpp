#include "aggre/gamma_scan.hpp"

#include "aggre/errors.hpp"
#include "aggre/parallel.hpp"

#include <cmath>

namespace aggre {

GammaScanResult gamma_scan(const ObservationSet& obs, const ModelParameters& theta_init, const FreeMask& mask,
                           std::span<const double> gammas, const CurveModel& model, const FitOptions& options) {
    if (gammas.empty()) throw ValidationError("gamma scan: empty gamma list");
    for (double g : gammas) {
        if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("gamma scan: every gamma must lie in [0,1]");
    }
    GammaScanResult res;
    res.rows.resize(gammas.size());
    parallel_for(gammas.size(), [&](std::size_t i) {
        GammaScanRow& row = res.rows[i];
        row.gamma = gammas[i];
        try {
            row.fit = fit(obs, theta_init, mask, row.gamma, model, options);
            row.residuals = residuals(obs, row.fit->model_values, row.gamma);
            row.diagnostics = residual_diagnostics(row.residuals);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    double best = 0.0;
    for (const auto& row : res.rows) {
        if (!row.ok) continue;
        const double score = std::abs(row.diagnostics.abs_model_correlation);
        if (!res.recommended || score < best) {
            best = score;
            res.recommended = row.gamma;
        }
    }
    return res;
}

} // namespace aggre
