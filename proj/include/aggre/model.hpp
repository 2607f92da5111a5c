#pragma once

// Parameters of the nucleated polymerization model and the parametric
// elongation-rate profile k_on(x).
//
// Units: time in hours, rate constants per mol/L, sizes in monomer units.
// The initial monomer concentration c0 is given in µmol/L (the customary lab
// unit); the forward solver converts it once to mol/L.

#include <array>
#include <bitset>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aggre {

/// The nine estimable quantities, in canonical order.
enum class Param : std::size_t {
    kI_plus,
    kI_minus,
    kon_N,
    koff_N,
    kon_min,
    kon_max,
    x1,
    x2,
    i_max,
};

inline constexpr std::size_t kParamCount = 9;

inline constexpr std::array<Param, kParamCount> kAllParams{
    Param::kI_plus, Param::kI_minus, Param::kon_N,   Param::koff_N, Param::kon_min,
    Param::kon_max, Param::x1,       Param::x2,      Param::i_max,
};

/// µmol/L -> mol/L.
inline constexpr double kMolarPerMicromolar = 1e-6;

std::string_view param_name(Param p) noexcept;
std::optional<Param> param_from_name(std::string_view name) noexcept;

struct ModelParameters {
    double kI_plus = 2.16;     // monomer -> conformer, 1/h
    double kI_minus = 10.91;   // conformer -> monomer, 1/h
    double kon_N = 4616.962;   // nucleation, 1/((mol/L)^(i0-1) h)
    double koff_N = 93.332;    // nucleus dissociation, 1/h
    double kon_min = 1684.381; // elongation floor, 1/((mol/L) h)
    double kon_max = 1.5152e9; // elongation plateau, 1/((mol/L) h)
    double x1 = 0.0626;        // plateau start, fraction of i_max
    double x2 = 0.859;         // plateau end, fraction of i_max
    double i_max = 3.542e5;    // elongation cut-off size

    int i0 = 2;         // nucleus size
    double c0 = 200.0;  // initial monomer concentration, µmol/L

    double get(Param p) const noexcept;
    void set(Param p, double value) noexcept;

    double c0_molar() const noexcept { return c0 * kMolarPerMicromolar; }

    friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Which of the nine parameters an estimation is allowed to move.
class FreeMask {
public:
    FreeMask() = default;
    FreeMask(std::initializer_list<Param> free);

    static FreeMask all();
    static FreeMask from_names(const std::vector<std::string>& names);

    bool is_free(Param p) const noexcept { return bits_.test(static_cast<std::size_t>(p)); }
    void set(Param p, bool free = true) noexcept { bits_.set(static_cast<std::size_t>(p), free); }
    std::size_t count() const noexcept { return bits_.count(); }

    /// Free parameters in canonical order.
    std::vector<Param> free_params() const;
    std::vector<std::string> names() const;

    /// True when every parameter free here is also free in `other`.
    bool subset_of(const FreeMask& other) const noexcept { return (bits_ & ~other.bits_).none(); }

    friend bool operator==(const FreeMask&, const FreeMask&) = default;

private:
    std::bitset<kParamCount> bits_;
};

/// Outcome of validate_parameters: the parameters themselves plus the list of
/// violated invariants (empty when valid).
struct ParameterCheck {
    ModelParameters params;
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Default discrete/continuous split point used when no mesh is given.
inline constexpr double kDefaultMeshStart = 50.0;

/// Never throws; collects every violated invariant.
ParameterCheck validate_parameters(const ModelParameters& p, double mesh_start = kDefaultMeshStart);

/// Throws ValidationError listing the violations.
void require_valid(const ModelParameters& p, double mesh_start = kDefaultMeshStart);

/// Trapezoidal elongation rate: linear ramp from kon_min at i0 up to kon_max
/// at x1*i_max, plateau until x2*i_max, linear ramp back to kon_min at i_max,
/// kon_min beyond. Continuous in x.
double kon_eval(double x, const ModelParameters& p);

/// The four breakpoints of the profile (i0, x1*i_max, x2*i_max, i_max).
std::array<double, 4> kon_breakpoints(const ModelParameters& p);

} // namespace aggre
