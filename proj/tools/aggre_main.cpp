// aggre: command-line workbench for the nucleated polymerization model.
//
//   aggre simulate    --config C --out DIR
//   aggre fit         --config C --data D --out DIR
//   aggre residuals   --config C --data D --out DIR
//   aggre gamma-scan  --config C --data D --out DIR
//   aggre uncertainty --config C --data D --out DIR
//   aggre bootstrap   --config C --data D --out DIR [--seed N]
//   aggre compare     --config C (--data D | --costs J) --out DIR
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical failure.

#include "aggre/bootstrap.hpp"
#include "aggre/comparison.hpp"
#include "aggre/config.hpp"
#include "aggre/errors.hpp"
#include "aggre/estimator.hpp"
#include "aggre/gamma_scan.hpp"
#include "aggre/io.hpp"
#include "aggre/observation.hpp"
#include "aggre/uncertainty.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace aggre;

namespace {

struct Common {
    std::string config;
    std::string data;
    std::string out;
    std::string costs;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    std::optional<std::string> scheme;
};

RunConfig resolve_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (c.gamma) {
        cfg.gamma = *c.gamma;
        cfg.simulation.gamma = *c.gamma;
    }
    if (c.seed) {
        cfg.simulation.seed = *c.seed;
        cfg.bootstrap.seed = *c.seed;
    }
    if (c.scheme) cfg.forward.scheme = scheme_from_name(*c.scheme);
    if (!c.out.empty()) cfg.output_dir = c.out;
    cfg.validate();
    return cfg;
}

struct Loaded {
    ObservationSet raw;
    ObservationSet used;
    Json info;
};

Loaded load_data(const Common& c, const RunConfig& cfg) {
    if (c.data.empty()) throw ValidationError("--data is required for this subcommand");
    Loaded d;
    d.raw = load_observations_csv(c.data);
    d.used = cfg.truncation.enabled
                 ? truncate_observations(d.raw, cfg.truncation.threshold, cfg.truncation.t_end)
                 : d.raw;
    d.info = Json{{"path", c.data}, {"hash_fnv1a64", data_hash(d.raw)}, {"n", d.raw.size()}, {"n_used", d.used.size()}};
    if (d.used.truncation) d.info["truncation_start"] = d.used.truncation->t_start;
    return d;
}

Json report(const std::string& command, const RunConfig& cfg) {
    return Json{{"command", command}, {"config", to_json(cfg)}};
}

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

void write_fit_tables(const fs::path& dir, const ObservationSet& obs, const FitResult& f) {
    std::vector<std::vector<double>> overlay, by_time, by_model;
    const ResidualSeries r = residuals(obs, f.model_values, f.gamma);
    for (std::size_t k = 0; k < obs.size(); ++k) overlay.push_back({obs.t[k], obs.y[k], f.model_values[k]});
    for (std::size_t k = 0; k < r.size(); ++k) {
        by_time.push_back({r.t[k], r.r[k]});
        by_model.push_back({r.model[k], r.r[k]});
    }
    write_file(dir / "fit_overlay.csv", format_table({"t", "y", "model"}, overlay));
    write_file(dir / "residuals_time.csv", format_table({"t", "r"}, by_time));
    write_file(dir / "residuals_model.csv", format_table({"model", "r"}, by_model));
}

std::string interval_table(const std::vector<Param>& params, const std::vector<double>& estimate,
                           const std::vector<double>& se, const std::vector<Interval>& iv) {
    std::string out = "parameter,estimate,se,lower,upper\n";
    char buf[160];
    for (std::size_t k = 0; k < params.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", std::string(param_name(params[k])).c_str(),
                      estimate[k], se[k], iv[k].lower, iv[k].upper);
        out += buf;
    }
    return out;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back("c" + std::to_string(j));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
    return format_table(header, rows);
}

int cmd_simulate(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    const auto& s = cfg.simulation;
    const auto grid = uniform_grid(s.t_start, s.t_end, s.n);
    ObservationSet obs = simulate_observations(s.truth, grid, s.gamma, s.sigma, s.seed, forward_curve(cfg.forward));
    // The data format has no negative fractions; noise at M ~ 0 can produce them.
    std::size_t clipped = 0;
    for (double& y : obs.y) {
        if (y < 0.0) {
            y = 0.0;
            ++clipped;
        }
    }
    const Trajectory truth = solve_forward(s.truth, grid, cfg.forward);

    Json rep = report("simulate", cfg);
    rep["provenance"] = to_json(obs.provenance);
    rep["n"] = obs.size();
    rep["clipped_negative"] = clipped;
    rep["hash_fnv1a64"] = data_hash(obs);
    try {
        const ObservationSet kept = truncate_observations(obs, cfg.truncation.threshold, cfg.truncation.t_end);
        rep["n_after_truncation"] = kept.size();
        rep["truncation_start"] = kept.truncation->t_start;
    } catch (const ValidationError&) {
        rep["n_after_truncation"] = 0;
    }
    write_file(dir / "data.csv", format_observations_csv(obs));
    write_file(dir / "truth_curve.csv", format_trajectory_csv(truth));
    write_json(dir / "provenance.json", rep);
    std::cout << "wrote " << obs.size() << " points to " << (dir / "data.csv").string() << "\n";
    return 0;
}

int cmd_fit(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    const Loaded d = load_data(c, cfg);
    const FitResult f = fit(d.used, cfg.parameters, cfg.mask(), cfg.gamma, forward_curve(cfg.forward), cfg.fit_options());
    Json rep = report("fit", cfg);
    rep["data"] = d.info;
    rep["fit"] = to_json(f);
    rep["diagnostics"] = to_json(residual_diagnostics(residuals(d.used, f.model_values, f.gamma)));
    write_json(dir / "fit.json", rep);
    write_fit_tables(dir, d.used, f);
    std::printf("J = %.10g (%s)\n", f.cost, f.converged() ? "converged" : "not converged");
    return 0;
}

int cmd_residuals(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    const Loaded d = load_data(c, cfg);
    const auto m = forward_curve(cfg.forward)(cfg.parameters, d.used.t);
    const ResidualSeries r = residuals(d.used, m, cfg.gamma);
    Json rep = report("residuals", cfg);
    rep["data"] = d.info;
    rep["cost"] = gls_cost(d.used.y, m, cfg.gamma);
    rep["diagnostics"] = to_json(residual_diagnostics(r));
    Json excluded = Json::array();
    for (const auto& e : r.excluded) excluded.push_back(Json{{"index", e.index}, {"reason", e.reason}});
    rep["excluded"] = excluded;
    write_json(dir / "residuals.json", rep);
    std::vector<std::vector<double>> by_time, by_model;
    for (std::size_t k = 0; k < r.size(); ++k) {
        by_time.push_back({r.t[k], r.r[k]});
        by_model.push_back({r.model[k], r.r[k]});
    }
    write_file(dir / "residuals_time.csv", format_table({"t", "r"}, by_time));
    write_file(dir / "residuals_model.csv", format_table({"model", "r"}, by_model));
    return 0;
}

int cmd_gamma_scan(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    const Loaded d = load_data(c, cfg);
    const GammaScanResult g =
        gamma_scan(d.used, cfg.parameters, cfg.mask(), cfg.gamma_list, forward_curve(cfg.forward), cfg.fit_options());
    Json rep = report("gamma-scan", cfg);
    rep["data"] = d.info;
    rep["scan"] = to_json(g);
    write_json(dir / "gamma_scan.json", rep);
    std::vector<std::vector<double>> rows;
    for (const auto& r : g.rows) {
        const double nan = std::nan("");
        rows.push_back({r.gamma, r.ok ? 1.0 : 0.0, r.ok ? r.fit->cost : nan,
                        r.ok ? r.diagnostics.lag1_autocorrelation : nan,
                        r.ok ? r.diagnostics.abs_model_correlation : nan});
    }
    write_file(dir / "gamma_scan.csv", format_table({"gamma", "ok", "cost", "lag1", "corr_abs_r_model"}, rows));
    if (g.recommended) std::printf("recommended gamma = %g\n", *g.recommended);
    return 0;
}

int cmd_uncertainty(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    const Loaded d = load_data(c, cfg);
    const CurveModel model = forward_curve(cfg.forward);
    const FitResult f = fit(d.used, cfg.parameters, cfg.mask(), cfg.gamma, model, cfg.fit_options());
    const UncertaintyReport u = analyze_uncertainty(f, d.used, model, FdConfig{cfg.uncertainty.rel_step},
                                                    cfg.uncertainty.level, cfg.uncertainty.cond_limit);
    Json rep = report("uncertainty", cfg);
    rep["data"] = d.info;
    rep["fit"] = to_json(f);
    rep["uncertainty"] = to_json(u);
    write_json(dir / "uncertainty.json", rep);
    write_file(dir / "chi.csv", matrix_csv(u.chi));
    write_file(dir / "fisher.csv", matrix_csv(u.fisher));
    if (u.errors.invertible) {
        write_file(dir / "confidence_intervals.csv", interval_table(u.params, u.estimate, u.errors.se, u.intervals));
    }
    std::printf("condition number %.3e, SE %s\n", u.errors.condition, u.errors.invertible ? "computed" : "refused");
    return 0;
}

std::string histogram_csv(const std::vector<std::vector<double>>& samples, std::size_t col, std::size_t bins) {
    double lo = samples.front()[col], hi = lo;
    for (const auto& s : samples) lo = std::min(lo, s[col]), hi = std::max(hi, s[col]);
    if (hi == lo) hi = lo + 1.0;
    std::vector<double> count(bins, 0.0);
    for (const auto& s : samples) {
        auto b = static_cast<std::size_t>((s[col] - lo) / (hi - lo) * static_cast<double>(bins));
        count[std::min(b, bins - 1)] += 1.0;
    }
    std::vector<std::vector<double>> rows;
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) rows.push_back({lo + w * static_cast<double>(b), lo + w * static_cast<double>(b + 1), count[b]});
    return format_table({"lower", "upper", "count"}, rows);
}

int cmd_bootstrap(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    const Loaded d = load_data(c, cfg);
    const CurveModel model = forward_curve(cfg.forward);
    const FitResult base = fit(d.used, cfg.parameters, cfg.mask(), cfg.gamma, model, cfg.fit_options());
    BootstrapOptions opt;
    opt.replicates = cfg.bootstrap.replicates;
    opt.seed = cfg.bootstrap.seed;
    opt.level = cfg.bootstrap.level;
    opt.fit = cfg.fit_options();
    const BootstrapResult b = bootstrap_estimate(d.used, base, model, opt);

    Json rep = report("bootstrap", cfg);
    rep["data"] = d.info;
    rep["base_fit"] = to_json(base);
    rep["bootstrap"] = to_json(b);
    write_json(dir / "bootstrap.json", rep);

    std::vector<std::string> header;
    for (Param p : b.params) header.emplace_back(param_name(p));
    write_file(dir / "bootstrap_samples.csv", format_table(header, b.samples));
    if (b.samples.size() >= 2) {
        std::vector<double> mean(b.params.size());
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] = b.summary.mean(static_cast<Eigen::Index>(k));
        write_file(dir / "bootstrap_intervals.csv", interval_table(b.params, mean, b.summary.se, b.summary.percentile));
        for (std::size_t k = 0; k < b.params.size(); ++k) {
            write_file(dir / ("bootstrap_hist_" + header[k] + ".csv"), histogram_csv(b.samples, k, 30));
        }
    }
    std::printf("%zu of %zu replicates converged\n", b.converged(), b.replicates);
    return 0;
}

void print_comparison(const ComparisonReport& r) {
    std::printf("  alpha   threshold\n");
    for (double a : {0.25, 0.10, 0.05, 0.01, 0.001}) std::printf("  %-6g  %.2f\n", a, chi_square_threshold(a, r.df));
    std::printf("U = %.4f, df = %d, p = %.4g, tau(%g) = %.4f -> %s\n", r.U, r.df, r.p_value, r.alpha, r.tau,
                verdict_name(r.verdict).c_str());
}

int cmd_compare(const Common& c) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = cfg.output_dir;
    Json rep = report("compare", cfg);
    if (!c.costs.empty()) {
        const Json j = parse_json(read_file(c.costs), c.costs);
        if (!j.is_object()) throw ValidationError(c.costs + ": expected a JSON object");
        for (const auto& [k, v] : j.items()) {
            if (k != "J_restricted" && k != "J_full" && k != "n" && k != "df" && k != "alpha") {
                throw ValidationError(c.costs + ": unknown field '" + k + "'");
            }
        }
        for (const char* k : {"J_restricted", "J_full", "n"}) {
            if (!j.contains(k) || !j[k].is_number()) throw ValidationError(c.costs + ": field '" + std::string(k) + "' must be a number");
        }
        const double n = j["n"].get<double>();
        if (!(n >= 1.0) || std::floor(n) != n) throw ValidationError(c.costs + ": n must be a positive integer");
        const int df = j.value("df", 1);
        const double alpha = j.value("alpha", cfg.alpha);
        const ComparisonReport r = compare_costs(j["J_restricted"].get<double>(), j["J_full"].get<double>(),
                                                 static_cast<std::size_t>(n), df, alpha);
        rep["costs"] = j;
        rep["comparisons"] = Json::array({to_json(r)});
        write_json(dir / "compare.json", rep);
        print_comparison(r);
        return 0;
    }
    const Loaded d = load_data(c, cfg);
    if (cfg.comparisons.empty()) throw ValidationError("config has no comparisons and --costs was not given");
    const CurveModel model = forward_curve(cfg.forward);
    rep["data"] = d.info;
    Json list = Json::array();
    for (const auto& spec : cfg.comparisons) {
        const ComparisonReport r =
            compare_nested(d.used, to_nested_spec(spec), cfg.parameters, cfg.gamma, cfg.alpha, model, cfg.fit_options());
        Json item = to_json(r);
        item["name"] = spec.name;
        list.push_back(std::move(item));
        std::printf("%s\n", spec.name.c_str());
        print_comparison(r);
    }
    rep["comparisons"] = list;
    write_json(dir / "compare.json", rep);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workbench for nucleated polymerization kinetics: simulate, fit, diagnose, quantify uncertainty"};
    app.require_subcommand(1);
    Common common;

    auto add = [&](const std::string& name, const std::string& help, bool data) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
        if (data) sub->add_option("--data", common.data, "Observations CSV with header t,m");
        sub->add_option("--out", common.out, "Output directory (overrides output_dir)");
        sub->add_option("--seed", common.seed, "Random seed (simulation and bootstrap)");
        sub->add_option("--gamma", common.gamma, "Weighting exponent in [0,1]");
        sub->add_option("--scheme", common.scheme, "upwind, lax_wendroff or flux_limiter");
        return sub;
    };
    add("simulate", "Generate synthetic observations", false);
    add("fit", "Generalized least-squares fit", true);
    add("residuals", "Residuals and diagnostics at the configured parameters", true);
    add("gamma-scan", "Fit under each gamma in gamma_list and compare diagnostics", true);
    add("uncertainty", "Fit, then sensitivities, Fisher matrix and standard errors", true);
    add("bootstrap", "Fit, then residual bootstrap", true);
    CLI::App* cmp = add("compare", "Nested-model test", true);
    cmp->add_option("--costs", common.costs, "JSON with J_restricted, J_full, n (optional df, alpha)")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "simulate") return cmd_simulate(common);
        if (name == "fit") return cmd_fit(common);
        if (name == "residuals") return cmd_residuals(common);
        if (name == "gamma-scan") return cmd_gamma_scan(common);
        if (name == "uncertainty") return cmd_uncertainty(common);
        if (name == "bootstrap") return cmd_bootstrap(common);
        if (name == "compare") return cmd_compare(common);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
