#pragma once

// Finite-volume discretization of  d_t u = -s * d_x(k(x) u)  on a geometric
// mesh, with s >= 0 a scalar speed factor (the conformer concentration in the
// hybrid model) and k(x) > 0 the elongation profile evaluated at cell centers.
//
// Fluxes are written in terms of w_j = k(xbar_j) u_j, which is transported
// with speed s*k along characteristics. The left boundary receives a
// prescribed inflow flux; the right boundary is closed (zero flux), so mass
// that reaches the last cell stays there.

#include "aggre/mesh.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace aggre {

enum class Scheme {
    upwind,        // first order, monotone under CFL; Heun in time
    lax_wendroff,  // second order in space and time, not monotone
    flux_limiter,  // Lax-Wendroff correction limited by van Leer's limiter
};

std::string_view scheme_name(Scheme s) noexcept;
/// Throws ValidationError for unknown names.
Scheme scheme_from_name(std::string_view name);

class AdvectionOperator {
public:
    /// `k_centers[j]` is the elongation rate at mesh.centers[j].
    AdvectionOperator(const Mesh& mesh, std::vector<double> k_centers, Scheme scheme);

    const Mesh& mesh() const noexcept { return mesh_; }
    Scheme scheme() const noexcept { return scheme_; }
    std::span<const double> k_centers() const noexcept { return k_; }

    /// Edge fluxes F[0..J] for the state `u`: F[0] = inflow, F[J] = 0.
    /// For upwind the result is the semi-discrete flux s*w_j. For the
    /// second-order schemes `dt` enters through the Courant number; dt = 0
    /// gives the semi-discrete limit of the scheme.
    /// `active` bounds the nonzero prefix of u; fluxes beyond it are zero.
    void fluxes(std::span<const double> u, double s, double inflow, double dt, std::span<double> out,
                std::size_t active) const;

    /// Semi-discrete first-order upwind fluxes regardless of the scheme.
    void upwind_fluxes(std::span<const double> u, double s, double inflow, std::span<double> out,
                       std::size_t active) const;

    /// du_j/dt = -(F_{j+1} - F_j) / dx_j.
    void divergence(std::span<const double> flux, std::span<double> out, std::size_t active) const;

    /// Stand-alone step with constant speed factor and inflow: Heun for
    /// upwind, the one-step high-resolution update otherwise.
    void advance(std::span<double> u, double s, double inflow, double dt) const;

    /// min_j dx_j / k_j; the CFL limit is this divided by s.
    double min_cfl_ratio() const noexcept { return min_ratio_; }

private:
    Mesh mesh_;
    std::vector<double> k_;
    Scheme scheme_;
    std::vector<double> center_gap_;  // xbar_{j+1} - xbar_j
    double min_ratio_ = 0.0;
};

} // namespace aggre
