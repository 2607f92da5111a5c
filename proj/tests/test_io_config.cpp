#include "aggre/config.hpp"
#include "aggre/errors.hpp"
#include "aggre/io.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <filesystem>

using namespace aggre;

namespace {

std::size_t parse_error_line(const std::string& text) {
    try {
        parse_observations_csv(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST_CASE("observation CSV parsing") {
    const auto obs = parse_observations_csv("t,m\n0.5,0.1\n1.0,0.2\n");
    CHECK(obs.size() == 2);
    CHECK(obs.t[1] == 1.0);
    CHECK(obs.y[0] == 0.1);
    CHECK(std::holds_alternative<IngestedProvenance>(obs.provenance));

    CHECK(parse_error_line("t,m\n1.0,0.1\n0.5,0.2\n") == 3);
    CHECK(parse_error_line("t,m\n0.5,nan\n") == 2);
    CHECK(parse_error_line("t,m\n0.5,-0.1\n") == 2);
    CHECK(parse_error_line("t,m\n0.5,0.1,3\n") == 2);
    CHECK(parse_error_line("time,mass\n0.5,0.1\n") == 1);
    CHECK(parse_error_line("t,m\n0.5,abc\n") == 2);
    CHECK(parse_error_line("# comment\nt,m\n\n0.5,0.1\n0.5,0.2\n") == 5);
    CHECK_THROWS_AS(parse_observations_csv(""), ParseError);
}

TEST_CASE("observation CSV round trip") {
    const auto obs = simulate_observations(synthetic::logistic_truth(), uniform_grid(0.0, 8.0, 97), 0.6, 0.003, 5,
                                           synthetic::logistic());
    std::vector<double> y(obs.y);
    for (auto& v : y) v = std::max(v, 0.0);
    const auto clean = make_observations(obs.t, y);
    const auto back = parse_observations_csv(format_observations_csv(clean));
    REQUIRE(back.size() == clean.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(std::abs(back.t[k] - clean.t[k]) <= 1e-12);
        CHECK(std::abs(back.y[k] - clean.y[k]) <= 1e-12);
    }
    CHECK(data_hash(back) == data_hash(clean));
}

TEST_CASE("file helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "aggre_io_test";
    std::filesystem::remove_all(dir);
    write_file(dir / "a" / "b.txt", "hello");
    CHECK(read_file(dir / "a" / "b.txt") == "hello");
    CHECK_THROWS_AS(read_file(dir / "missing.csv"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("config defaults and round trip") {
    const RunConfig def = config_from_json(Json::object());
    CHECK(def.mask() == FreeMask{Param::kI_plus, Param::kI_minus, Param::koff_N});
    CHECK(def.gamma == 0.6);
    const RunConfig again = config_from_json(to_json(def));
    CHECK(to_json(again).dump() == to_json(def).dump());

    const auto j = parse_json(R"({"gamma": 1.0, "free": ["kI_plus", "kon_N"],
        "parameters": {"koff_N": 90.536},
        "forward": {"scheme": "flux_limiter", "mesh": {"q": 0.02}},
        "comparisons": [{"name": "a", "full": ["kI_plus", "kI_minus", "koff_N"],
                         "restricted": ["kI_plus", "kI_minus"], "pinned": {"koff_N": 93.332}}]})",
                              "inline");
    const RunConfig c = config_from_json(j);
    CHECK(c.gamma == 1.0);
    CHECK(c.parameters.koff_N == 90.536);
    CHECK(c.forward.scheme == Scheme::flux_limiter);
    CHECK(c.forward.mesh.q == 0.02);
    const NestedSpec spec = to_nested_spec(c.comparisons.at(0));
    CHECK(spec.constraints() == 1);
    REQUIRE(spec.pinned.size() == 1);
    CHECK(spec.pinned[0].second == 93.332);
}

TEST_CASE("config rejects unknown and invalid fields") {
    CHECK_THROWS_WITH_AS(config_from_json(parse_json(R"({"gamma": 0.6, "gamm": 1})", "x")),
                         doctest::Contains("gamm"), ValidationError);
    CHECK_THROWS_AS(config_from_json(parse_json(R"({"forward": {"mesh": {"qq": 1}}})", "x")), ValidationError);
    CHECK_THROWS_AS(config_from_json(parse_json(R"({"free": ["kI_plus", "nope"]})", "x")), ValidationError);
    CHECK_THROWS_AS(config_from_json(parse_json(R"({"forward": {"scheme": "euler"}})", "x")), ValidationError);
    CHECK_THROWS_AS(config_from_json(parse_json(R"({"gamma": "high"})", "x")), ValidationError);
    CHECK_THROWS_AS(config_from_json(parse_json(R"({"parameters": {"kI_plus": -1}})", "x")), ValidationError);
    try {
        parse_json("{\n\"a\": 1,\n}", "cfg.json");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}
