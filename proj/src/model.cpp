#include "aggre/model.hpp"

#include "aggre/errors.hpp"

#include <cmath>
#include <sstream>

namespace aggre {

namespace {

constexpr std::array<std::string_view, kParamCount> kNames{
    "kI_plus", "kI_minus", "kon_N", "koff_N", "kon_min", "kon_max", "x1", "x2", "i_max",
};

constexpr std::array<double ModelParameters::*, kParamCount> kFields{
    &ModelParameters::kI_plus, &ModelParameters::kI_minus, &ModelParameters::kon_N,
    &ModelParameters::koff_N,  &ModelParameters::kon_min,  &ModelParameters::kon_max,
    &ModelParameters::x1,      &ModelParameters::x2,       &ModelParameters::i_max,
};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

} // namespace

std::string_view param_name(Param p) noexcept { return kNames[static_cast<std::size_t>(p)]; }

std::optional<Param> param_from_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (kNames[i] == name) return static_cast<Param>(i);
    }
    return std::nullopt;
}

double ModelParameters::get(Param p) const noexcept { return this->*kFields[static_cast<std::size_t>(p)]; }

void ModelParameters::set(Param p, double value) noexcept { this->*kFields[static_cast<std::size_t>(p)] = value; }

FreeMask::FreeMask(std::initializer_list<Param> free) {
    for (Param p : free) set(p);
}

FreeMask FreeMask::all() {
    FreeMask m;
    m.bits_.set();
    return m;
}

FreeMask FreeMask::from_names(const std::vector<std::string>& names) {
    FreeMask m;
    for (const auto& n : names) {
        auto p = param_from_name(n);
        if (!p) throw ValidationError("unknown parameter name '" + n + "'");
        m.set(*p);
    }
    return m;
}

std::vector<Param> FreeMask::free_params() const {
    std::vector<Param> out;
    for (Param p : kAllParams) {
        if (is_free(p)) out.push_back(p);
    }
    return out;
}

std::vector<std::string> FreeMask::names() const {
    std::vector<std::string> out;
    for (Param p : free_params()) out.emplace_back(param_name(p));
    return out;
}

ParameterCheck validate_parameters(const ModelParameters& p, double mesh_start) {
    ParameterCheck check{p, {}};
    auto& v = check.violations;

    for (Param q : {Param::kI_plus, Param::kI_minus, Param::koff_N, Param::kon_min, Param::kon_max}) {
        if (!positive_finite(p.get(q))) {
            std::ostringstream os;
            os << param_name(q) << ": positive rate violated (got " << p.get(q) << ")";
            v.push_back(os.str());
        }
    }
    // kon_N = 0 is allowed: it switches nucleation off.
    if (!(std::isfinite(p.kon_N) && p.kon_N >= 0.0)) {
        std::ostringstream os;
        os << "kon_N: nonnegative rate violated (got " << p.kon_N << ")";
        v.push_back(os.str());
    }
    if (positive_finite(p.kon_min) && positive_finite(p.kon_max) && p.kon_min > p.kon_max) {
        v.push_back("kon_min <= kon_max violated");
    }
    if (!(std::isfinite(p.x1) && p.x1 > 0.0 && p.x1 < 1.0)) v.push_back("x1 in (0,1) violated");
    if (!(std::isfinite(p.x2) && p.x2 > 0.0 && p.x2 < 1.0)) v.push_back("x2 in (0,1) violated");
    if (!(p.x1 < p.x2)) v.push_back("x1 < x2 violated");
    if (!(std::isfinite(p.i_max) && p.i_max > mesh_start)) {
        std::ostringstream os;
        os << "i_max > N0 violated (i_max = " << p.i_max << ", N0 = " << mesh_start << ")";
        v.push_back(os.str());
    }
    if (p.i0 < 2) v.push_back("i0 >= 2 violated");
    if (!positive_finite(p.c0)) v.push_back("c0: positive concentration violated");
    return check;
}

void require_valid(const ModelParameters& p, double mesh_start) {
    auto check = validate_parameters(p, mesh_start);
    if (check.ok()) return;
    std::string msg = "invalid model parameters:";
    for (const auto& s : check.violations) msg += " [" + s + "]";
    throw ValidationError(msg);
}

std::array<double, 4> kon_breakpoints(const ModelParameters& p) {
    return {static_cast<double>(p.i0), p.x1 * p.i_max, p.x2 * p.i_max, p.i_max};
}

double kon_eval(double x, const ModelParameters& p) {
    if (!(positive_finite(p.kon_min) && positive_finite(p.kon_max) && p.x1 > 0.0 && p.x1 < p.x2 && p.x2 < 1.0 &&
          positive_finite(p.i_max))) {
        throw ValidationError("kon_eval: invalid k_on profile parameters");
    }
    const auto [start, rise_end, fall_start, stop] = kon_breakpoints(p);
    const double lo = p.kon_min;
    const double hi = p.kon_max;

    if (x >= stop) return lo;
    if (x > fall_start) return hi + (lo - hi) * (x - fall_start) / (stop - fall_start);
    if (x >= rise_end) return hi;
    // A plateau that begins at or before the nucleus size has no rising ramp.
    if (rise_end <= start) return hi;
    if (x <= start) return lo;
    return lo + (hi - lo) * (x - start) / (rise_end - start);
}

} // namespace aggre
