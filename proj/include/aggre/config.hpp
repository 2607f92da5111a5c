#pragma once

// Run configuration and JSON (de)serialization of inputs and reports.
// Every field has a default; unknown keys are rejected so that typos do not
// silently fall back to defaults.

#include "aggre/bootstrap.hpp"
#include "aggre/comparison.hpp"
#include "aggre/estimator.hpp"
#include "aggre/forward.hpp"
#include "aggre/gamma_scan.hpp"
#include "aggre/model.hpp"
#include "aggre/observation.hpp"
#include "aggre/uncertainty.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace aggre {

using Json = nlohmann::ordered_json;

struct TruncationSettings {
    bool enabled = true;
    double threshold = 0.12;
    double t_end = 8.0;
};

struct SimulationSettings {
    ModelParameters truth;
    double t_start = 0.0;
    double t_end = 8.0;
    std::size_t n = 1645;
    double sigma = 0.00253;
    double gamma = 0.6;
    std::uint64_t seed = 1;
};

struct UncertaintySettings {
    double rel_step = 1e-4;
    double level = 0.95;
    double cond_limit = kDefaultCondLimit;
};

struct BootstrapSettings {
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    double level = 0.95;
};

struct ComparisonSpecConfig {
    std::string name;
    std::vector<std::string> full;
    std::vector<std::string> restricted;
    std::vector<std::pair<std::string, double>> pinned;
};

struct RunConfig {
    ModelParameters parameters;
    std::vector<std::string> free{"kI_plus", "kI_minus", "koff_N"};
    ForwardSettings forward;
    double gamma = 0.6;
    TruncationSettings truncation;
    OptimizerConfig optimizer;
    bool log_space = true;
    SimulationSettings simulation;
    UncertaintySettings uncertainty;
    BootstrapSettings bootstrap;
    std::vector<ComparisonSpecConfig> comparisons;
    double alpha = 0.01;
    std::vector<double> gamma_list{0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0};
    std::string output_dir = "out";

    FreeMask mask() const { return FreeMask::from_names(free); }
    FitOptions fit_options() const { return FitOptions{optimizer, log_space}; }
    /// Throws ValidationError for inconsistent settings.
    void validate() const;
};

Json to_json(const ModelParameters& p);
/// Missing fields keep the values of `base`.
ModelParameters parameters_from_json(const Json& j, const ModelParameters& base = {});

Json to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);

NestedSpec to_nested_spec(const ComparisonSpecConfig& c);

Json to_json(const FitResult& f);
Json to_json(const ResidualDiagnostics& d);
Json to_json(const UncertaintyReport& r);
Json to_json(const BootstrapResult& b);
Json to_json(const ComparisonReport& r);
Json to_json(const GammaScanResult& g);
Json to_json(const Provenance& p);
Json to_json(const Trajectory& t);

/// Parses JSON text; syntax errors become ParseError with the line number.
Json parse_json(const std::string& text, const std::string& source);

} // namespace aggre
