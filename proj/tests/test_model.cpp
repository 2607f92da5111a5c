#include "aggre/errors.hpp"
#include "aggre/mesh.hpp"
#include "aggre/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aggre;

namespace {

bool mentions(const ParameterCheck& c, const std::string& what) {
    for (const auto& v : c.violations)
        if (v.find(what) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("kon profile: plateau, floor and ramp") {
    const ModelParameters p;
    CHECK(kon_eval(0.5 * (p.x1 + p.x2) * p.i_max, p) == doctest::Approx(p.kon_max).epsilon(1e-15));
    CHECK(kon_eval(2.0 * p.i_max, p) == p.kon_min);
    CHECK(kon_eval(p.i0, p) == p.kon_min);

    // Midpoint of the rising ramp, evaluated from the piecewise-linear formula by hand.
    const double a = p.i0, b = p.x1 * p.i_max;
    const double mid = 0.5 * (a + b);
    const double expected = p.kon_min + (p.kon_max - p.kon_min) * (mid - a) / (b - a);
    CHECK(kon_eval(mid, p) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.5 * (p.kon_min + p.kon_max)).epsilon(1e-14));

    // Falling ramp midpoint.
    const double c = p.x2 * p.i_max;
    CHECK(kon_eval(0.5 * (c + p.i_max), p) == doctest::Approx(0.5 * (p.kon_min + p.kon_max)).epsilon(1e-12));
}

TEST_CASE("kon profile is continuous at the breakpoints and bounded") {
    const ModelParameters p;
    const double h = 1e-6 * p.i_max;
    const double slope = (p.kon_max - p.kon_min) / (p.x1 * p.i_max - p.i0);
    for (double x : kon_breakpoints(p)) {
        const double jump = std::abs(kon_eval(x + h, p) - kon_eval(std::max(x - h, double(p.i0)), p));
        CHECK(jump <= 2.0 * h * slope * 1.0001);
    }
    for (int k = 0; k < 2000; ++k) {
        const double x = p.i0 + k * (3.0 * p.i_max / 2000.0);
        const double v = kon_eval(x, p);
        CHECK(v >= p.kon_min);
        CHECK(v <= p.kon_max);
    }
}

TEST_CASE("kon profile rejects invalid parameters") {
    ModelParameters p;
    p.x1 = 0.9;
    p.x2 = 0.1;
    CHECK_THROWS_AS(kon_eval(10.0, p), ValidationError);
    p = ModelParameters{};
    p.kon_min = -1.0;
    CHECK_THROWS_AS(kon_eval(10.0, p), ValidationError);
}

TEST_CASE("validate_parameters: default parameter table is valid") {
    ModelParameters p;
    p.kI_plus = 2.16;
    p.kI_minus = 10.91;
    p.kon_N = 4616.962;
    p.koff_N = 93.332;
    p.kon_min = 1684.381;
    p.kon_max = 1.5152e9;
    p.x1 = 0.0626;
    p.x2 = 0.859;
    p.i_max = 3.542e5;
    const auto c = validate_parameters(p);
    CHECK(c.ok());
    CHECK(c.params == p);
}

TEST_CASE("validate_parameters names each violation") {
    ModelParameters p;
    p.x1 = 0.9;
    p.x2 = 0.1;
    CHECK(mentions(validate_parameters(p), "x1 < x2 violated"));

    p = ModelParameters{};
    p.kI_plus = 0.0;
    const auto c = validate_parameters(p);
    CHECK(mentions(c, "positive rate violated"));
    CHECK(mentions(c, "kI_plus"));

    p = ModelParameters{};
    p.i_max = 40.0;
    CHECK(mentions(validate_parameters(p), "i_max > N0 violated"));
    p = ModelParameters{};
    p.i0 = 1;
    CHECK(mentions(validate_parameters(p), "i0 >= 2 violated"));

    p = ModelParameters{};
    p.kI_plus = -1;
    p.koff_N = 0;
    p.x2 = 1.5;
    CHECK(validate_parameters(p).violations.size() == 3);
    CHECK_THROWS_AS(require_valid(p), ValidationError);
}

TEST_CASE("validate_parameters is idempotent") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        ModelParameters p;
        for (Param q : kAllParams) p.set(q, p.get(q) * u(rng));
        const auto once = validate_parameters(p);
        const auto twice = validate_parameters(once.params);
        CHECK(once.params == twice.params);
        CHECK(once.violations == twice.violations);
    }
}

TEST_CASE("parameter names round-trip and masks") {
    for (Param p : kAllParams) CHECK(param_from_name(param_name(p)) == p);
    CHECK_FALSE(param_from_name("kon").has_value());
    const FreeMask m{Param::kI_plus, Param::koff_N};
    CHECK(m.count() == 2);
    CHECK(m.names() == std::vector<std::string>{"kI_plus", "koff_N"});
    CHECK(FreeMask::from_names({"kI_plus", "koff_N"}) == m);
    CHECK(m.subset_of(FreeMask::all()));
    CHECK_FALSE(FreeMask::all().subset_of(m));
    CHECK_THROWS_AS(FreeMask::from_names({"nope"}), ValidationError);
}

TEST_CASE("build_mesh: q = 0.5 doubles the edges") {
    const Mesh m = build_mesh(50, 400, 0.5);
    REQUIRE(m.cells() == 3);
    CHECK(m.edges == std::vector<double>{50, 100, 200, 400});
    CHECK(m.centers[0] == 75);
    CHECK(m.widths[2] == 200);
}

TEST_CASE("build_mesh: default-like cell count") {
    // ceil(log(7000) / log(1/0.99)) evaluated by hand: 880.9 -> 881.
    CHECK(mesh_cell_count(50, 3.5e5, 0.01) == 881);
    const Mesh m = build_mesh(50, 3.5e5, 0.01);
    CHECK(m.cells() == 881);
    CHECK(m.edges.front() == 50);
    CHECK(m.edges.back() >= 3.5e5);
}

TEST_CASE("build_mesh: geometric ratio and monotone edges") {
    for (double q : {0.3, 0.05, 0.01, 0.001}) {
        const Mesh m = build_mesh(50, 1e6, q);
        for (std::size_t j = 1; j < m.cells(); ++j) {
            CHECK(m.edges[j] > m.edges[j - 1]);
            CHECK(m.widths[j - 1] / m.widths[j] == doctest::Approx(1.0 - q).epsilon(1e-12));
            CHECK(m.edges[j] / m.edges[j - 1] == doctest::Approx(1.0 / (1.0 - q)).epsilon(1e-12));
        }
    }
}

TEST_CASE("build_mesh rejects bad input") {
    CHECK_THROWS_AS(build_mesh(50, 400, 0.0), ValidationError);
    CHECK_THROWS_AS(build_mesh(50, 400, 1.0), ValidationError);
    CHECK_THROWS_AS(build_mesh(50, 50, 0.1), ValidationError);
    CHECK_THROWS_AS(build_mesh(50, 10, 0.1), ValidationError);
}
