#include "aggre/advection.hpp"

#include "aggre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aggre {

namespace {

// van Leer: harmonic-mean slope when the one-sided slopes agree in sign.
inline double van_leer(double upwind_slope, double downwind_slope) {
    const double prod = upwind_slope * downwind_slope;
    if (prod <= 0.0) return 0.0;
    return 2.0 * prod / (upwind_slope + downwind_slope);
}

} // namespace

std::string_view scheme_name(Scheme s) noexcept {
    switch (s) {
    case Scheme::upwind: return "upwind";
    case Scheme::lax_wendroff: return "lax_wendroff";
    case Scheme::flux_limiter: return "flux_limiter";
    }
    return "unknown";
}

Scheme scheme_from_name(std::string_view name) {
    if (name == "upwind") return Scheme::upwind;
    if (name == "lax_wendroff" || name == "lax-wendroff") return Scheme::lax_wendroff;
    if (name == "flux_limiter" || name == "flux-limiter" || name == "van_leer") return Scheme::flux_limiter;
    throw ValidationError("unknown scheme '" + std::string(name) + "' (expected upwind, lax_wendroff or flux_limiter)");
}

AdvectionOperator::AdvectionOperator(const Mesh& mesh, std::vector<double> k_centers, Scheme scheme)
    : mesh_(mesh), k_(std::move(k_centers)), scheme_(scheme) {
    const std::size_t n = mesh_.cells();
    if (k_.size() != n) throw ValidationError("advection: rate profile size does not match the mesh");
    center_gap_.resize(n > 0 ? n - 1 : 0);
    for (std::size_t j = 0; j + 1 < n; ++j) center_gap_[j] = mesh_.centers[j + 1] - mesh_.centers[j];
    min_ratio_ = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (!(k_[j] > 0.0)) throw ValidationError("advection: rate profile must be positive");
        min_ratio_ = std::min(min_ratio_, mesh_.widths[j] / k_[j]);
    }
}

void AdvectionOperator::fluxes(std::span<const double> u, double s, double inflow, double dt,
                               std::span<double> out, std::size_t active) const {
    const std::size_t n = mesh_.cells();
    const std::size_t last = std::min(active, n > 0 ? n - 1 : 0);  // edges 1..last carry flux
    out[0] = inflow;
    std::fill(out.begin() + 1, out.end(), 0.0);
    if (s <= 0.0 || n == 0) {
        // Still honour the inflow, which is fed by the discrete block.
        return;
    }

    const auto& dx = mesh_.widths;
    if (scheme_ == Scheme::upwind) {
        for (std::size_t j = 0; j < last; ++j) out[j + 1] = s * k_[j] * u[j];
        return;
    }

    // w at the inflow edge, used for the upwind slope of the first cell.
    const double w_in = inflow / s;
    double w_prev = w_in;
    double gap_prev = mesh_.centers[0] - mesh_.edges[0];
    double w_here = k_[0] * u[0];
    for (std::size_t j = 0; j < last; ++j) {
        const double w_next = k_[j + 1] * u[j + 1];
        const double down = (w_next - w_here) / center_gap_[j];
        double slope = down;
        if (scheme_ == Scheme::flux_limiter) {
            const double up = (w_here - w_prev) / gap_prev;
            slope = van_leer(up, down);
        }
        const double courant = s * k_[j] * dt / dx[j];
        out[j + 1] = s * (w_here + 0.5 * dx[j] * (1.0 - courant) * slope);
        w_prev = w_here;
        w_here = w_next;
        gap_prev = center_gap_[j];
    }
}

void AdvectionOperator::upwind_fluxes(std::span<const double> u, double s, double inflow, std::span<double> out,
                                      std::size_t active) const {
    const std::size_t n = mesh_.cells();
    const std::size_t last = std::min(active, n > 0 ? n - 1 : 0);
    out[0] = inflow;
    std::fill(out.begin() + 1, out.end(), 0.0);
    if (s <= 0.0) return;
    for (std::size_t j = 0; j < last; ++j) out[j + 1] = s * k_[j] * u[j];
}

void AdvectionOperator::divergence(std::span<const double> flux, std::span<double> out, std::size_t active) const {
    const std::size_t n = mesh_.cells();
    const std::size_t stop = std::min(active + 1, n);
    const auto& dx = mesh_.widths;
    for (std::size_t j = 0; j < stop; ++j) out[j] = -(flux[j + 1] - flux[j]) / dx[j];
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(stop), out.end(), 0.0);
}

void AdvectionOperator::advance(std::span<double> u, double s, double inflow, double dt) const {
    const std::size_t n = mesh_.cells();
    std::vector<double> flux(n + 1), rate(n);
    if (scheme_ == Scheme::upwind) {
        std::vector<double> stage(u.begin(), u.end());
        fluxes(u, s, inflow, 0.0, flux, n);
        divergence(flux, rate, n);
        for (std::size_t j = 0; j < n; ++j) stage[j] = u[j] + dt * rate[j];
        std::vector<double> rate2(n);
        fluxes(stage, s, inflow, 0.0, flux, n);
        divergence(flux, rate2, n);
        for (std::size_t j = 0; j < n; ++j) u[j] += 0.5 * dt * (rate[j] + rate2[j]);
        return;
    }
    fluxes(u, s, inflow, dt, flux, n);
    divergence(flux, rate, n);
    for (std::size_t j = 0; j < n; ++j) u[j] += dt * rate[j];
}

} // namespace aggre
