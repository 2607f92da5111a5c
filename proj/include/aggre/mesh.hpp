#pragma once

#include <cstddef>
#include <vector>

namespace aggre {

/// Geometric size grid for the continuous part of the size distribution.
/// Edges satisfy x_{j+1} = x_j / (1 - q), so widths shrink toward small
/// sizes and dx_{j-1} / dx_j = 1 - q.
struct Mesh {
    double n0 = 0.0;     // first edge (start of the continuous range)
    double x_max = 0.0;  // requested coverage; the last edge is >= x_max
    double q = 0.0;      // refinement ratio, dx_j / x_{j+1}
    std::vector<double> edges;
    std::vector<double> centers;
    std::vector<double> widths;

    std::size_t cells() const noexcept { return widths.size(); }
};

/// Number of cells: ceil(log(x_max / n0) / log(1 / (1 - q))).
std::size_t mesh_cell_count(double n0, double x_max, double q);

/// Throws ValidationError for q outside (0,1) or x_max <= n0.
Mesh build_mesh(double n0, double x_max, double q);

} // namespace aggre
