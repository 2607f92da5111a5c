#include "aggre/curve_model.hpp"

namespace aggre {

CurveModel forward_curve(const ForwardSettings& settings) {
    return [settings](const ModelParameters& p, std::span<const double> t) {
        return polymerized_fraction(p, t, settings);
    };
}

} // namespace aggre
