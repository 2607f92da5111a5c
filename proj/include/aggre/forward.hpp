#pragma once

// Hybrid ODE / finite-volume forward model.
//
// Sizes i0..N0 are tracked as discrete concentrations c_i; sizes above N0 as
// cell averages u_j of a continuous density on a geometric mesh. The monomer
// V is integrated; the conformer pool V* is not integrated but recovered from
// mass conservation,
//
//     V* = c0 - V - sum_{i=i0}^{N0} i c_i - sum_j xbar_j u_j dx_j,
//
// so total mass is conserved by construction. Concentrations inside this
// module are in mol/L.

#include "aggre/advection.hpp"
#include "aggre/mesh.hpp"
#include "aggre/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace aggre {

/// How the mesh is derived from the parameters: edges start at n0 and cover
/// x_max = x_max_factor * i_max (or `x_max` when positive).
struct MeshSettings {
    double n0 = kDefaultMeshStart;
    double q = 0.01;
    double x_max_factor = 4.0;
    double x_max = 0.0;

    double resolve_x_max(const ModelParameters& p) const { return x_max > 0.0 ? x_max : x_max_factor * p.i_max; }
    Mesh build(const ModelParameters& p) const;
};

struct SolverOptions {
    double safety = 0.9;
    std::size_t max_steps = 20'000'000;
    bool clamp_negative = true;
    /// V* below -negative_tolerance * c0 aborts the run.
    double negative_tolerance = 1e-8;
    /// Keep full states at every output time (needed for state-level audits).
    bool store_states = false;
    bool record_dt = true;
    /// Evaluate OutputPoint::elongation (one flux sweep per output time).
    bool record_elongation = true;
};

struct ForwardSettings {
    MeshSettings mesh;
    Scheme scheme = Scheme::upwind;
    SolverOptions solver;
};

struct HybridState {
    double t = 0.0;
    double V = 0.0;
    std::vector<double> c;  // c[k] is the concentration of size i0 + k
    std::vector<double> u;  // cell averages on the mesh
    double V_star = 0.0;
};

/// Scalar summary recorded at each output time.
struct OutputPoint {
    double t = 0.0;
    double m = 0.0;               // polymerized mass / c0
    double V = 0.0;
    double V_star = 0.0;
    double nucleus = 0.0;         // c_{i0}
    double discrete_mass = 0.0;   // sum i c_i
    double continuous_mass = 0.0; // sum xbar_j u_j dx_j
    double elongation = 0.0;      // mass gained per unit time by conformer addition
};

struct Trajectory {
    Scheme scheme = Scheme::upwind;
    int i0 = 2;
    double c0 = 0.0;  // mol/L
    Mesh mesh;
    std::vector<OutputPoint> points;
    std::vector<HybridState> states;  // empty unless store_states
    std::vector<double> dt_history;
    std::size_t steps = 0;
    double clamped_mass = 0.0;  // mass added by clipping negative values

    std::vector<double> times() const;
    std::vector<double> m() const;
};

/// Largest stable explicit step: safety * min(advective bound, ODE bound).
/// The advective bound is min over the mesh cells and the discrete sizes
/// (width 1) of dx / (V* kon); the ODE bound is 1 / max(kI+ + kI-,
/// koff_N + kon(i0) V*, kI- + i0^2 kon_N V*^(i0-1) + sum kon c). When V* = 0
/// only the ODE bound applies.
double stable_dt(const HybridState& state, const Mesh& mesh, const ModelParameters& p, double safety);

/// Integrates from t = 0 (V = c0, everything else zero) and records the
/// state at each requested time. t_out must be strictly increasing, >= 0.
Trajectory solve_forward(const ModelParameters& p, const Mesh& mesh, Scheme scheme, std::span<const double> t_out,
                         const SolverOptions& options = {});

Trajectory solve_forward(const ModelParameters& p, std::span<const double> t_out, const ForwardSettings& settings = {});

/// Polymerized mass fraction M(t)/c0 at the given times.
std::vector<double> polymerized_fraction(const ModelParameters& p, std::span<const double> t_out,
                                         const ForwardSettings& settings = {});

/// max_k |V + V* + polymer mass - c0| / c0. Uses the stored states when
/// present, otherwise the recorded summaries.
double conservation_residual(const Trajectory& traj);

/// Compares a centered difference of the closed-form V* across output times
/// with the conformer balance
///   kI+ V - kI- V* + i0 koff_N c_{i0} - i0 kon_N V*^{i0} - elongation.
/// Returns the maximum absolute mismatch (mol/L per hour) over interior
/// output times. Needs at least three output times.
double closure_consistency(const Trajectory& traj, const ModelParameters& p);

} // namespace aggre
