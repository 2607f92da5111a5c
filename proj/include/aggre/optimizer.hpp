#pragma once

// Nelder-Mead simplex minimizer with restarts.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aggre {

struct OptimizerConfig {
    double cost_rel_tol = 1e-10;   // stop when (f_worst - f_best) <= rel * |f_best| + abs
    double cost_abs_tol = 1e-16;
    double diameter_tol = 1e-8;    // ... and the simplex diameter is below this
    std::size_t max_iterations = 2000;  // per run
    std::size_t restarts = 2;           // extra runs started from the best point
    double initial_step = 0.05;         // simplex edge length
};

struct OptimizerTrace {
    std::size_t iterations = 0;      // summed over runs
    std::size_t evaluations = 0;
    std::size_t failed_evaluations = 0;  // objective returned a non-finite value
    std::size_t restarts_used = 0;
    double spread = 0.0;             // final f_worst - f_best
    double diameter = 0.0;           // final simplex diameter (max-norm)
    bool converged = false;
    std::vector<double> best_history;  // best value after each iteration
};

struct MinimizeResult {
    std::vector<double> x;
    double f = 0.0;
    OptimizerTrace trace;
};

using Objective = std::function<double(std::span<const double>)>;

/// Non-finite objective values are treated as +inf. Throws ValidationError
/// when f(x0) is not finite or x0 is empty.
MinimizeResult minimize(const Objective& f, std::vector<double> x0, const OptimizerConfig& cfg = {});

} // namespace aggre
