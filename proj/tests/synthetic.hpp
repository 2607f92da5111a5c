#pragma once

// Cheap closed-form curve models for exercising the statistics code without
// the PDE solver. They read generic coordinates out of ModelParameters.

#include "aggre/curve_model.hpp"

#include <cmath>

namespace synthetic {

// Logistic curve: rate kI_plus, midpoint kI_minus.
inline aggre::CurveModel logistic() {
    return [](const aggre::ModelParameters& p, std::span<const double> t) {
        std::vector<double> m(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) m[k] = 1.0 / (1.0 + std::exp(-p.kI_plus * (t[k] - p.kI_minus)));
        return m;
    };
}

// Straight line kI_plus + kI_minus * t.
inline aggre::CurveModel line() {
    return [](const aggre::ModelParameters& p, std::span<const double> t) {
        std::vector<double> m(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) m[k] = p.kI_plus + p.kI_minus * t[k];
        return m;
    };
}

// Constant kI_plus.
inline aggre::CurveModel constant() {
    return [](const aggre::ModelParameters& p, std::span<const double> t) {
        return std::vector<double>(t.size(), p.kI_plus);
    };
}

inline aggre::ModelParameters logistic_truth() {
    aggre::ModelParameters p;
    p.kI_plus = 1.5;
    p.kI_minus = 4.0;
    return p;
}

} // namespace synthetic
