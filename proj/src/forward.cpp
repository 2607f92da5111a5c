#include "aggre/forward.hpp"

#include "aggre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace aggre {

Mesh MeshSettings::build(const ModelParameters& p) const { return build_mesh(n0, resolve_x_max(p), q); }

std::vector<double> Trajectory::times() const {
    std::vector<double> out(points.size());
    std::transform(points.begin(), points.end(), out.begin(), [](const OutputPoint& pt) { return pt.t; });
    return out;
}

std::vector<double> Trajectory::m() const {
    std::vector<double> out(points.size());
    std::transform(points.begin(), points.end(), out.begin(), [](const OutputPoint& pt) { return pt.m; });
    return out;
}

namespace {

int discrete_top(const Mesh& mesh, int i0) {
    const double n0 = mesh.n0;
    if (std::floor(n0) != n0 || n0 < i0 + 1) {
        std::ostringstream os;
        os << "mesh start N0 must be an integer >= i0 + 1 (N0 = " << n0 << ", i0 = " << i0 << ")";
        throw ValidationError(os.str());
    }
    return static_cast<int>(n0);
}

void check_output_times(std::span<const double> t_out) {
    if (t_out.empty()) throw ValidationError("solve_forward: no output times");
    if (!(std::isfinite(t_out[0]) && t_out[0] >= 0.0)) throw ValidationError("solve_forward: t_out[0] must be >= 0");
    for (std::size_t k = 1; k < t_out.size(); ++k) {
        if (!(std::isfinite(t_out[k]) && t_out[k] > t_out[k - 1])) {
            std::ostringstream os;
            os << "solve_forward: output times must be strictly increasing (index " << k << ", t = " << t_out[k] << ")";
            throw ValidationError(os.str());
        }
    }
}

std::vector<double> kon_at(std::span<const double> x, const ModelParameters& p) {
    std::vector<double> k(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) k[j] = kon_eval(x[j], p);
    return k;
}

// Everything a single solve needs that depends on the parameters only.
class HybridSystem {
public:
    HybridSystem(const ModelParameters& p, const Mesh& mesh, Scheme scheme)
        : p_(p),
          i0_(p.i0),
          n_top_(discrete_top(mesh, p.i0)),
          c0_(p.c0_molar()),
          op_(mesh, kon_at(mesh.centers, p), scheme) {
        const int nd = n_top_ - i0_ + 1;
        sizes_.resize(nd);
        kon_d_.resize(nd);
        for (int k = 0; k < nd; ++k) {
            sizes_[k] = static_cast<double>(i0_ + k);
            kon_d_[k] = kon_eval(sizes_[k], p);
        }
        moment_weight_.resize(mesh.cells());
        for (std::size_t j = 0; j < mesh.cells(); ++j) moment_weight_[j] = mesh.centers[j] * mesh.widths[j];
        min_ratio_ = op_.min_cfl_ratio();
        for (double k : kon_d_) min_ratio_ = std::min(min_ratio_, 1.0 / k);
    }

    std::size_t nd() const { return sizes_.size(); }
    std::size_t cells() const { return op_.mesh().cells(); }
    double c0() const { return c0_; }
    const AdvectionOperator& op() const { return op_; }

    double discrete_mass(std::span<const double> c) const {
        return std::inner_product(c.begin(), c.end(), sizes_.begin(), 0.0);
    }
    double continuous_mass(std::span<const double> u, std::size_t active) const {
        double s = 0.0;
        for (std::size_t j = 0; j < active; ++j) s += moment_weight_[j] * u[j];
        return s;
    }
    double closure(double V, std::span<const double> c, std::span<const double> u, std::size_t active) const {
        return c0_ - V - discrete_mass(c) - continuous_mass(u, active);
    }

    double inflow(std::span<const double> c, double vs) const { return vs * kon_d_.back() * c.back(); }

    // Time derivatives of the ODE block (V and the discrete sizes).
    void ode_rhs(double V, std::span<const double> c, double vs, double& dV, std::span<double> dc) const {
        dV = -p_.kI_plus * V + p_.kI_minus * vs;
        const std::size_t n = c.size();
        double flux_prev = vs * kon_d_[0] * c[0];
        dc[0] = p_.kon_N * std::pow(vs, i0_) - p_.koff_N * c[0] - flux_prev;
        for (std::size_t k = 1; k < n; ++k) {
            const double flux = vs * kon_d_[k] * c[k];
            dc[k] = flux_prev - flux;
            flux_prev = flux;
        }
    }

    double dt_limit(double vs, std::span<const double> c, std::span<const double> u, std::size_t active,
                    double safety) const {
        double rate = std::max(p_.kI_plus + p_.kI_minus, p_.koff_N + kon_d_[0] * vs);
        double weighted = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) weighted += kon_d_[k] * c[k];
        const auto kc = op_.k_centers();
        const auto& dx = op_.mesh().widths;
        for (std::size_t j = 0; j < active; ++j) weighted += kc[j] * u[j] * dx[j];
        const double nucleation = static_cast<double>(i0_ * i0_) * p_.kon_N * std::pow(vs, i0_ - 1);
        rate = std::max(rate, p_.kI_minus + nucleation + weighted);
        double dt = 1.0 / rate;
        if (vs > 0.0) dt = std::min(dt, min_ratio_ / vs);
        return safety * dt;
    }

    // Mass gained per unit time by conformer addition in the semi-discrete system.
    double elongation(std::span<const double> c, std::span<const double> u, double vs, std::size_t active,
                      std::vector<double>& flux) const {
        if (vs <= 0.0) return 0.0;
        double rate = 0.0;
        for (std::size_t k = 0; k + 1 < c.size(); ++k) rate += vs * kon_d_[k] * c[k];
        const double f_in = inflow(c, vs);
        op_.fluxes(u, vs, f_in, 0.0, flux, active);
        const auto& mesh = op_.mesh();
        rate += (mesh.centers[0] - mesh.edges[0]) * f_in;
        for (std::size_t j = 1; j < mesh.cells(); ++j) rate += flux[j] * (mesh.centers[j] - mesh.centers[j - 1]);
        return rate;
    }

private:
    const ModelParameters& p_;
    int i0_;
    int n_top_;
    double c0_;
    AdvectionOperator op_;
    std::vector<double> sizes_;
    std::vector<double> kon_d_;
    std::vector<double> moment_weight_;
    double min_ratio_ = 0.0;
};

double clamp_negative(std::span<double> v, std::span<const double> weight, std::size_t count) {
    double added = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        if (v[k] < 0.0) {
            added -= weight[k] * v[k];
            v[k] = 0.0;
        }
    }
    return added;
}

std::size_t trim_active(std::span<const double> u, std::size_t active) {
    while (active > 0 && u[active - 1] == 0.0) --active;
    return active;
}

} // namespace

double stable_dt(const HybridState& state, const Mesh& mesh, const ModelParameters& p, double safety) {
    if (!(safety > 0.0 && safety <= 1.0)) throw ValidationError("stable_dt: safety must lie in (0,1]");
    HybridSystem sys(p, mesh, Scheme::upwind);
    if (state.c.size() != sys.nd() || state.u.size() != sys.cells()) {
        throw ValidationError("stable_dt: state does not match the mesh");
    }
    const double vs = std::max(state.V_star, 0.0);
    return sys.dt_limit(vs, state.c, state.u, state.u.size(), safety);
}

Trajectory solve_forward(const ModelParameters& p, const Mesh& mesh, Scheme scheme, std::span<const double> t_out,
                         const SolverOptions& options) {
    require_valid(p, mesh.n0);
    check_output_times(t_out);
    if (!(options.safety > 0.0 && options.safety <= 1.0)) throw ValidationError("solver safety must lie in (0,1]");

    const HybridSystem sys(p, mesh, scheme);
    const std::size_t nd = sys.nd();
    const std::size_t nc = sys.cells();
    const double c0 = sys.c0();
    const double neg_tol = options.negative_tolerance * c0;

    std::vector<double> c(nd, 0.0), u(nc, 0.0);
    std::vector<double> cp(nd), up(nc), dc1(nd), dc2(nd), du(nc), du2(nc);
    std::vector<double> flux(nc + 1), flux2(nc + 1);
    double V = c0;
    double t = 0.0;
    std::size_t active = 0;

    std::vector<double> size_weight(nd);
    for (std::size_t k = 0; k < nd; ++k) size_weight[k] = static_cast<double>(p.i0) + static_cast<double>(k);
    std::vector<double> moment_weight(nc);
    for (std::size_t j = 0; j < nc; ++j) moment_weight[j] = mesh.centers[j] * mesh.widths[j];

    Trajectory traj;
    traj.scheme = scheme;
    traj.i0 = p.i0;
    traj.c0 = c0;
    traj.mesh = mesh;
    traj.points.reserve(t_out.size());

    auto check_vstar = [&](double vs, double when) {
        if (vs < -neg_tol || !std::isfinite(vs)) {
            std::ostringstream os;
            os << "conformer concentration V* = " << vs << " mol/L went negative at t = " << when << " h";
            throw NumericalError(os.str());
        }
    };

    auto record = [&]() {
        OutputPoint pt;
        pt.t = t;
        pt.V = V;
        pt.discrete_mass = sys.discrete_mass(c);
        pt.continuous_mass = sys.continuous_mass(u, active);
        pt.V_star = c0 - V - pt.discrete_mass - pt.continuous_mass;
        pt.m = (pt.discrete_mass + pt.continuous_mass) / c0;
        pt.nucleus = c[0];
        if (options.record_elongation) pt.elongation = sys.elongation(c, u, std::max(pt.V_star, 0.0), active, flux2);
        traj.points.push_back(pt);
        if (options.store_states) traj.states.push_back(HybridState{t, V, c, u, pt.V_star});
    };

    std::size_t next = 0;
    if (t_out[0] == 0.0) {
        record();
        next = 1;
    }

    while (next < t_out.size()) {
        const double target = t_out[next];
        const double vs_raw = sys.closure(V, c, u, active);
        check_vstar(vs_raw, t);
        const double vs = std::max(vs_raw, 0.0);

        double dt = sys.dt_limit(vs, c, u, active, options.safety);
        bool lands = false;
        if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
            dt = target - t;
            lands = true;
        }
        if (++traj.steps > options.max_steps) {
            std::ostringstream os;
            os << "time-step budget of " << options.max_steps << " exceeded at t = " << t << " h";
            throw ResourceError(os.str());
        }
        if (options.record_dt) traj.dt_history.push_back(dt);

        // Predictor (explicit Euler, upwind fluxes).
        double dV1 = 0.0;
        sys.ode_rhs(V, c, vs, dV1, dc1);
        const double in1 = sys.inflow(c, vs);
        sys.op().upwind_fluxes(u, vs, in1, flux, active);
        sys.op().divergence(flux, du, active);
        const std::size_t active_p = std::min(nc, active + 1);
        const double Vp = V + dt * dV1;
        for (std::size_t k = 0; k < nd; ++k) cp[k] = c[k] + dt * dc1[k];
        for (std::size_t j = 0; j < active_p; ++j) up[j] = u[j] + dt * du[j];
        std::fill(up.begin() + static_cast<std::ptrdiff_t>(active_p), up.end(), 0.0);
        if (options.clamp_negative) {
            traj.clamped_mass += clamp_negative(cp, size_weight, nd);
            traj.clamped_mass += clamp_negative(up, moment_weight, active_p);
        }
        const double vsp_raw = sys.closure(Vp, cp, up, active_p);
        check_vstar(vsp_raw, t + dt);
        const double vsp = std::max(vsp_raw, 0.0);

        // Corrector: Heun for the ODE block.
        double dV2 = 0.0;
        sys.ode_rhs(Vp, cp, vsp, dV2, dc2);
        const double in2 = sys.inflow(cp, vsp);
        V += 0.5 * dt * (dV1 + dV2);
        for (std::size_t k = 0; k < nd; ++k) c[k] += 0.5 * dt * (dc1[k] + dc2[k]);

        // The continuous block receives exactly the averaged outflow of c_{N0}.
        const double in_avg = 0.5 * (in1 + in2);
        std::size_t active_new = 0;
        if (scheme == Scheme::upwind) {
            sys.op().upwind_fluxes(up, vsp, in2, flux2, active_p);
            for (std::size_t e = 0; e <= nc; ++e) flux[e] = 0.5 * (flux[e] + flux2[e]);
            active_new = std::min(nc, active_p + 1);
        } else {
            sys.op().fluxes(u, 0.5 * (vs + vsp), in_avg, dt, flux, active);
            active_new = active_p;
        }
        flux[0] = in_avg;
        sys.op().divergence(flux, du, active_new);
        for (std::size_t j = 0; j < active_new; ++j) u[j] += dt * du[j];
        if (options.clamp_negative) {
            traj.clamped_mass += clamp_negative(c, size_weight, nd);
            traj.clamped_mass += clamp_negative(u, moment_weight, active_new);
        }
        active = trim_active(u, active_new);

        t = lands ? target : t + dt;
        if (lands) {
            record();
            check_vstar(traj.points.back().V_star, t);
            ++next;
        }
    }
    return traj;
}

Trajectory solve_forward(const ModelParameters& p, std::span<const double> t_out, const ForwardSettings& settings) {
    require_valid(p, settings.mesh.n0);
    const Mesh mesh = settings.mesh.build(p);
    return solve_forward(p, mesh, settings.scheme, t_out, settings.solver);
}

std::vector<double> polymerized_fraction(const ModelParameters& p, std::span<const double> t_out,
                                         const ForwardSettings& settings) {
    ForwardSettings s = settings;
    s.solver.store_states = false;
    s.solver.record_dt = false;
    s.solver.record_elongation = false;
    return solve_forward(p, t_out, s).m();
}

double conservation_residual(const Trajectory& traj) {
    if (!(traj.c0 > 0.0)) throw ValidationError("conservation_residual: trajectory has no initial concentration");
    double worst = 0.0;
    if (!traj.states.empty()) {
        const auto& mesh = traj.mesh;
        for (const auto& s : traj.states) {
            double mass = s.V + s.V_star;
            for (std::size_t k = 0; k < s.c.size(); ++k) mass += (traj.i0 + static_cast<double>(k)) * s.c[k];
            for (std::size_t j = 0; j < s.u.size(); ++j) mass += mesh.centers[j] * mesh.widths[j] * s.u[j];
            worst = std::max(worst, std::abs(mass - traj.c0) / traj.c0);
        }
        return worst;
    }
    for (const auto& pt : traj.points) {
        const double mass = pt.V + pt.V_star + pt.discrete_mass + pt.continuous_mass;
        worst = std::max(worst, std::abs(mass - traj.c0) / traj.c0);
    }
    return worst;
}

double closure_consistency(const Trajectory& traj, const ModelParameters& p) {
    const auto& pts = traj.points;
    if (pts.size() < 3) throw ValidationError("closure_consistency: needs at least three output times");
    const double i0 = static_cast<double>(traj.i0);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
        const double h1 = pts[k].t - pts[k - 1].t;
        const double h2 = pts[k + 1].t - pts[k].t;
        // Second-order three-point derivative on a nonuniform grid.
        const double derivative = -h2 / (h1 * (h1 + h2)) * pts[k - 1].V_star +
                                  (h2 - h1) / (h1 * h2) * pts[k].V_star +
                                  h1 / (h2 * (h1 + h2)) * pts[k + 1].V_star;
        const double vs = std::max(pts[k].V_star, 0.0);
        const double balance = p.kI_plus * pts[k].V - p.kI_minus * vs + i0 * p.koff_N * pts[k].nucleus -
                               i0 * p.kon_N * std::pow(vs, traj.i0) - pts[k].elongation;
        worst = std::max(worst, std::abs(derivative - balance));
    }
    return worst;
}

} // namespace aggre
