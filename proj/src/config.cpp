#include "aggre/config.hpp"

#include "aggre/errors.hpp"
#include "aggre/io.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace aggre {

namespace {

// Reads fields of one JSON object and rejects keys that were never asked for.
class Fields {
public:
    Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(where_ + "." + key + ": wrong type");
        }
    }

    const Json* object(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw ValidationError(where_ + ": unknown field '" + k + "'");
        }
    }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

Json mesh_json(const MeshSettings& m) {
    return Json{{"n0", m.n0}, {"q", m.q}, {"x_max_factor", m.x_max_factor}, {"x_max", m.x_max}};
}

Json solver_json(const SolverOptions& s) {
    return Json{{"safety", s.safety},
                {"max_steps", s.max_steps},
                {"clamp_negative", s.clamp_negative},
                {"negative_tolerance", s.negative_tolerance}};
}

Json optimizer_json(const OptimizerConfig& o) {
    return Json{{"cost_rel_tol", o.cost_rel_tol},   {"cost_abs_tol", o.cost_abs_tol},
                {"diameter_tol", o.diameter_tol},   {"max_iterations", o.max_iterations},
                {"restarts", o.restarts},           {"initial_step", o.initial_step}};
}

Json vector_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// JSON has no infinity; write it as a string.
Json real(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

Json names(const std::vector<Param>& ps) {
    Json a = Json::array();
    for (Param p : ps) a.push_back(std::string(param_name(p)));
    return a;
}

Json trace_json(const OptimizerTrace& t) {
    return Json{{"iterations", t.iterations},
                {"evaluations", t.evaluations},
                {"failed_evaluations", t.failed_evaluations},
                {"restarts_used", t.restarts_used},
                {"spread", real(t.spread)},
                {"diameter", real(t.diameter)},
                {"converged", t.converged},
                {"best_history", t.best_history}};
}

Json intervals_json(const std::vector<Interval>& iv) {
    Json a = Json::array();
    for (const auto& i : iv) a.push_back(Json::array({i.lower, i.upper}));
    return a;
}

} // namespace

Json to_json(const ModelParameters& p) {
    Json j;
    for (Param q : kAllParams) j[std::string(param_name(q))] = p.get(q);
    j["i0"] = p.i0;
    j["c0"] = p.c0;
    return j;
}

ModelParameters parameters_from_json(const Json& j, const ModelParameters& base) {
    ModelParameters p = base;
    Fields f(j, "parameters");
    for (Param q : kAllParams) {
        double v = p.get(q);
        f.get(std::string(param_name(q)).c_str(), v);
        p.set(q, v);
    }
    f.get("i0", p.i0);
    f.get("c0", p.c0);
    f.finish();
    return p;
}

void RunConfig::validate() const {
    require_valid(parameters, forward.mesh.n0);
    if (mask().count() == 0) throw ValidationError("free: at least one parameter must be free");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0,1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
    if (!(uncertainty.level > 0.0 && uncertainty.level < 1.0)) throw ValidationError("uncertainty.level must lie in (0,1)");
    if (!(bootstrap.level > 0.0 && bootstrap.level < 1.0)) throw ValidationError("bootstrap.level must lie in (0,1)");
    if (bootstrap.replicates < 2) throw ValidationError("bootstrap.replicates must be >= 2");
    if (!(simulation.sigma >= 0.0)) throw ValidationError("simulation.sigma must be >= 0");
    if (!(simulation.gamma >= 0.0 && simulation.gamma <= 1.0)) throw ValidationError("simulation.gamma must lie in [0,1]");
    if (simulation.n < 2 || !(simulation.t_end > simulation.t_start) || simulation.t_start < 0.0) {
        throw ValidationError("simulation: need n >= 2 and 0 <= t_start < t_end");
    }
    require_valid(simulation.truth, forward.mesh.n0);
    for (double g : gamma_list) {
        if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("gamma_list entries must lie in [0,1]");
    }
    for (const auto& c : comparisons) to_nested_spec(c).validate();
}

Json to_json(const RunConfig& c) {
    Json comps = Json::array();
    for (const auto& s : c.comparisons) {
        Json pinned = Json::object();
        for (const auto& [k, v] : s.pinned) pinned[k] = v;
        comps.push_back(Json{{"name", s.name}, {"full", s.full}, {"restricted", s.restricted}, {"pinned", pinned}});
    }
    return Json{
        {"parameters", to_json(c.parameters)},
        {"free", c.free},
        {"forward",
         {{"scheme", std::string(scheme_name(c.forward.scheme))},
          {"mesh", mesh_json(c.forward.mesh)},
          {"solver", solver_json(c.forward.solver)}}},
        {"gamma", c.gamma},
        {"truncation",
         {{"enabled", c.truncation.enabled}, {"threshold", c.truncation.threshold}, {"t_end", c.truncation.t_end}}},
        {"optimizer", optimizer_json(c.optimizer)},
        {"log_space", c.log_space},
        {"simulation",
         {{"truth", to_json(c.simulation.truth)},
          {"t_start", c.simulation.t_start},
          {"t_end", c.simulation.t_end},
          {"n", c.simulation.n},
          {"sigma", c.simulation.sigma},
          {"gamma", c.simulation.gamma},
          {"seed", c.simulation.seed}}},
        {"uncertainty",
         {{"rel_step", c.uncertainty.rel_step}, {"level", c.uncertainty.level}, {"cond_limit", c.uncertainty.cond_limit}}},
        {"bootstrap",
         {{"replicates", c.bootstrap.replicates}, {"seed", c.bootstrap.seed}, {"level", c.bootstrap.level}}},
        {"comparisons", comps},
        {"alpha", c.alpha},
        {"gamma_list", c.gamma_list},
        {"output_dir", c.output_dir},
    };
}

RunConfig config_from_json(const Json& j) {
    RunConfig c;
    Fields f(j, "config");
    if (const Json* p = f.object("parameters")) c.parameters = parameters_from_json(*p);
    f.get("free", c.free);
    if (const Json* fw = f.object("forward")) {
        Fields g(*fw, "forward");
        std::string scheme(scheme_name(c.forward.scheme));
        g.get("scheme", scheme);
        c.forward.scheme = scheme_from_name(scheme);
        if (const Json* m = g.object("mesh")) {
            Fields h(*m, "forward.mesh");
            h.get("n0", c.forward.mesh.n0);
            h.get("q", c.forward.mesh.q);
            h.get("x_max_factor", c.forward.mesh.x_max_factor);
            h.get("x_max", c.forward.mesh.x_max);
            h.finish();
        }
        if (const Json* s = g.object("solver")) {
            Fields h(*s, "forward.solver");
            h.get("safety", c.forward.solver.safety);
            h.get("max_steps", c.forward.solver.max_steps);
            h.get("clamp_negative", c.forward.solver.clamp_negative);
            h.get("negative_tolerance", c.forward.solver.negative_tolerance);
            h.finish();
        }
        g.finish();
    }
    f.get("gamma", c.gamma);
    if (const Json* t = f.object("truncation")) {
        Fields g(*t, "truncation");
        g.get("enabled", c.truncation.enabled);
        g.get("threshold", c.truncation.threshold);
        g.get("t_end", c.truncation.t_end);
        g.finish();
    }
    if (const Json* o = f.object("optimizer")) {
        Fields g(*o, "optimizer");
        g.get("cost_rel_tol", c.optimizer.cost_rel_tol);
        g.get("cost_abs_tol", c.optimizer.cost_abs_tol);
        g.get("diameter_tol", c.optimizer.diameter_tol);
        g.get("max_iterations", c.optimizer.max_iterations);
        g.get("restarts", c.optimizer.restarts);
        g.get("initial_step", c.optimizer.initial_step);
        g.finish();
    }
    f.get("log_space", c.log_space);
    if (const Json* s = f.object("simulation")) {
        Fields g(*s, "simulation");
        if (const Json* t = g.object("truth")) c.simulation.truth = parameters_from_json(*t);
        g.get("t_start", c.simulation.t_start);
        g.get("t_end", c.simulation.t_end);
        g.get("n", c.simulation.n);
        g.get("sigma", c.simulation.sigma);
        g.get("gamma", c.simulation.gamma);
        g.get("seed", c.simulation.seed);
        g.finish();
    }
    if (const Json* u = f.object("uncertainty")) {
        Fields g(*u, "uncertainty");
        g.get("rel_step", c.uncertainty.rel_step);
        g.get("level", c.uncertainty.level);
        g.get("cond_limit", c.uncertainty.cond_limit);
        g.finish();
    }
    if (const Json* b = f.object("bootstrap")) {
        Fields g(*b, "bootstrap");
        g.get("replicates", c.bootstrap.replicates);
        g.get("seed", c.bootstrap.seed);
        g.get("level", c.bootstrap.level);
        g.finish();
    }
    if (const Json* cs = f.object("comparisons")) {
        if (!cs->is_array()) throw ValidationError("comparisons: expected an array");
        for (const auto& item : *cs) {
            ComparisonSpecConfig s;
            Fields g(item, "comparisons[]");
            g.get("name", s.name);
            g.get("full", s.full);
            g.get("restricted", s.restricted);
            if (const Json* p = g.object("pinned")) {
                if (!p->is_object()) throw ValidationError("comparisons[].pinned: expected an object");
                for (const auto& [k, v] : p->items()) {
                    if (!v.is_number()) throw ValidationError("comparisons[].pinned." + k + ": expected a number");
                    s.pinned.emplace_back(k, v.get<double>());
                }
            }
            g.finish();
            c.comparisons.push_back(std::move(s));
        }
    }
    f.get("alpha", c.alpha);
    f.get("gamma_list", c.gamma_list);
    f.get("output_dir", c.output_dir);
    f.finish();
    c.validate();
    return c;
}

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Translate the byte offset into a line number.
        std::size_t line = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
        for (std::size_t i = 0; i + 1 < stop; ++i) line += text[i] == '\n';
        throw ParseError(source, line, "invalid JSON");
    }
}

RunConfig load_config(const std::string& path) { return config_from_json(parse_json(read_file(path), path)); }

NestedSpec to_nested_spec(const ComparisonSpecConfig& c) {
    NestedSpec s;
    s.full = FreeMask::from_names(c.full);
    s.restricted = FreeMask::from_names(c.restricted);
    for (const auto& [k, v] : c.pinned) {
        const auto p = param_from_name(k);
        if (!p) throw ValidationError("comparisons: unknown parameter '" + k + "'");
        s.pinned.emplace_back(*p, v);
    }
    return s;
}

Json to_json(const FitResult& f) {
    Json estimate = Json::object();
    for (Param p : f.mask.free_params()) estimate[std::string(param_name(p))] = f.theta.get(p);
    return Json{{"status", f.converged() ? "converged" : "not_converged"},
                {"free", f.mask.names()},
                {"estimate", estimate},
                {"parameters", to_json(f.theta)},
                {"gamma", f.gamma},
                {"cost", f.cost},
                {"initial_cost", f.initial_cost},
                {"warnings", f.warnings},
                {"optimizer", trace_json(f.trace)}};
}

Json to_json(const ResidualDiagnostics& d) {
    return Json{{"n", d.n},
                {"lag1_autocorrelation", d.lag1_autocorrelation},
                {"abs_model_correlation", d.abs_model_correlation},
                {"mean", d.mean},
                {"variance", d.variance},
                {"zero_variance", d.zero_variance}};
}

Json to_json(const UncertaintyReport& r) {
    Json j{{"free", names(r.params)},
           {"estimate", r.estimate},
           {"gamma", r.gamma},
           {"n", r.n},
           {"sigma2_hat", r.sigma2},
           {"condition_number", real(r.errors.condition)},
           {"invertible", r.errors.invertible},
           {"fisher", matrix_json(r.fisher)},
           {"notes", r.notes}};
    if (r.errors.invertible) {
        j["covariance"] = matrix_json(r.errors.covariance);
        j["se"] = r.errors.se;
        j["level"] = r.level;
        j["intervals"] = intervals_json(r.intervals);
    }
    return j;
}

Json to_json(const BootstrapResult& b) {
    Json status = Json::array();
    for (const auto& o : b.outcomes) {
        Json e{{"status", o.status == ReplicateStatus::converged       ? "converged"
                          : o.status == ReplicateStatus::not_converged ? "not_converged"
                                                                        : "failed"}};
        if (!o.theta.empty()) e["theta"] = o.theta, e["cost"] = o.cost;
        if (!o.error.empty()) e["error"] = o.error;
        status.push_back(std::move(e));
    }
    Json j{{"free", names(b.params)},
           {"seed", b.seed},
           {"replicates", b.replicates},
           {"converged", b.converged()},
           {"warnings", b.warnings}};
    if (b.summary.mean.size() > 0) {
        j["mean"] = vector_json(std::span<const double>(b.summary.mean.data(), static_cast<std::size_t>(b.summary.mean.size())));
        j["covariance"] = matrix_json(b.summary.covariance);
        j["se"] = b.summary.se;
        j["level"] = b.summary.level;
        j["percentile_intervals"] = intervals_json(b.summary.percentile);
    }
    j["per_replicate"] = std::move(status);
    return j;
}

Json to_json(const ComparisonReport& r) {
    Json j{{"J_restricted", r.J_restricted},
           {"J_full", r.J_full},
           {"n", r.n},
           {"U", r.U},
           {"clamped", r.clamped},
           {"df", r.df},
           {"p_value", r.p_value},
           {"alpha", r.alpha},
           {"tau", r.tau},
           {"verdict", verdict_name(r.verdict)},
           {"warnings", r.warnings}};
    if (r.restricted_fit) j["restricted_fit"] = to_json(*r.restricted_fit);
    if (r.full_fit) j["full_fit"] = to_json(*r.full_fit);
    return j;
}

Json to_json(const GammaScanResult& g) {
    Json rows = Json::array();
    for (const auto& r : g.rows) {
        Json row{{"gamma", r.gamma}, {"ok", r.ok}};
        if (r.ok) {
            row["diagnostics"] = to_json(r.diagnostics);
            row["fit"] = to_json(*r.fit);
        } else {
            row["error"] = r.error;
        }
        rows.push_back(std::move(row));
    }
    Json j{{"rows", rows}};
    j["recommended_gamma"] = g.recommended ? Json(*g.recommended) : Json(nullptr);
    return j;
}

Json to_json(const Provenance& p) {
    if (const auto* s = std::get_if<SyntheticProvenance>(&p)) {
        return Json{{"kind", "synthetic"},
                    {"seed", s->seed},
                    {"gamma", s->gamma},
                    {"sigma", s->sigma},
                    {"truth", to_json(s->truth)}};
    }
    if (const auto* i = std::get_if<IngestedProvenance>(&p)) return Json{{"kind", "ingested"}, {"path", i->path}};
    return Json{{"kind", "unknown"}};
}

Json to_json(const Trajectory& t) {
    Json pts = Json::array();
    for (const auto& p : t.points) {
        pts.push_back(Json{{"t", p.t},
                           {"m", p.m},
                           {"V", p.V},
                           {"V_star", p.V_star},
                           {"nucleus", p.nucleus},
                           {"discrete_mass", p.discrete_mass},
                           {"continuous_mass", p.continuous_mass}});
    }
    return Json{{"scheme", std::string(scheme_name(t.scheme))},
                {"i0", t.i0},
                {"c0_molar", t.c0},
                {"mesh", {{"n0", t.mesh.n0}, {"x_max", t.mesh.x_max}, {"q", t.mesh.q}, {"cells", t.mesh.cells()}}},
                {"steps", t.steps},
                {"clamped_mass", t.clamped_mass},
                {"points", pts}};
}

} // namespace aggre
