#pragma once

// The statistics modules see the forward model only as a map
// (parameters, times) -> polymerized fraction at those times.

#include "aggre/forward.hpp"
#include "aggre/model.hpp"

#include <functional>
#include <span>
#include <vector>

namespace aggre {

using CurveModel = std::function<std::vector<double>(const ModelParameters&, std::span<const double>)>;

/// M(t)/c0 from the hybrid solver with the given settings.
CurveModel forward_curve(const ForwardSettings& settings = {});

} // namespace aggre
