#include "aggre/mesh.hpp"

#include "aggre/errors.hpp"

#include <cmath>
#include <string>

namespace aggre {

std::size_t mesh_cell_count(double n0, double x_max, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("mesh: q must lie in (0,1), got " + std::to_string(q));
    if (!(n0 > 0.0 && std::isfinite(x_max) && x_max > n0)) {
        throw ValidationError("mesh: need 0 < N0 < x_max (N0 = " + std::to_string(n0) +
                              ", x_max = " + std::to_string(x_max) + ")");
    }
    const double exact = std::log(x_max / n0) / -std::log1p(-q);
    // Absorb rounding so that exact powers (e.g. 50 -> 400 at q = 0.5) give 3, not 4.
    return static_cast<std::size_t>(std::ceil(exact - 1e-9));
}

Mesh build_mesh(double n0, double x_max, double q) {
    const std::size_t n = mesh_cell_count(n0, x_max, q);
    Mesh mesh{n0, x_max, q, {}, {}, {}};
    mesh.edges.reserve(n + 1);
    mesh.edges.push_back(n0);
    const double growth = 1.0 / (1.0 - q);
    for (std::size_t j = 0; j < n; ++j) mesh.edges.push_back(mesh.edges.back() * growth);

    // Rounding in the product can leave the last edge a hair short of x_max.
    if (mesh.edges.back() < x_max) mesh.edges.back() = x_max;

    mesh.centers.resize(n);
    mesh.widths.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        mesh.centers[j] = 0.5 * (mesh.edges[j] + mesh.edges[j + 1]);
        mesh.widths[j] = mesh.edges[j + 1] - mesh.edges[j];
    }
    return mesh;
}

} // namespace aggre
