#include <doctest.h>

#include "inject_sim/errors.hpp"
#include "inject_sim/units_params.hpp"
#include "test_util.hpp"

using namespace inject;
using nlohmann::json;

TEST_CASE("empty config gives defaults") {
    const auto dir = testutil::temp_dir("cfg");
    testutil::write_file(dir / "c.json", "{}");
    const SimulationConfig c = load_config(dir / "c.json");
    CHECK(c == SimulationConfig{});
    CHECK(c.grid_n == 64);
    CHECK(c.seed == 0);
    CHECK(c.reservoir.c_hy == 3.6e-4);
    CHECK(c.reservoir.beta == 1.2e-4);
    CHECK(c.reservoir.f == 0.5);
    CHECK(c.reservoir.tau_dot0 == 1e-6);
    CHECK(c.reservoir.t_a == 500100.0);
    CHECK(c.reservoir.d_x == 5.0);
    CHECK(c.reservoir.d_z == 0.1);
    CHECK(c.wells.size() == 4);
    CHECK(c.regions.size() == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("grid size must be a power of two") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"n": 48}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"n": 8}})")), ConfigError);
    CHECK(config_from_json(json::parse(R"({"grid": {"n": 32}})")).grid_n == 32);
}

TEST_CASE("explicit diffusivity") {
    const auto c = config_from_json(json::parse(R"({"reservoir": {"c_hy": 3.6e-4}})"));
    CHECK(c.reservoir.c_hy == 3.6e-4);
}

TEST_CASE("bad input is rejected with the field name") {
    try {
        config_from_json(json::parse(R"({"reservoir": {"c_hyy": 1}})"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("reservoir.c_hyy") != std::string::npos);
    }
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"reservoir": {"beta": -1}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"n": "big"}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"([1,2])")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"controller": {"k1": 1e-3}})")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/x.json"), ConfigError);
}

TEST_CASE("nominal parameters") {
    ReservoirParams p;
    const auto q = nominal_params(p, 1.1);
    CHECK(q.f == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(q.t_a == doctest::Approx(550110.0).epsilon(1e-15));
    CHECK(q.d_x == p.d_x);
    CHECK(q.d_z == p.d_z);
    CHECK(nominal_params(p, 1.0) == p);
    CHECK_THROWS_AS(nominal_params(p, 0.0), ConfigError);
}

TEST_CASE("nominal parameters compose multiplicatively") {
    ReservoirParams p;
    for (double a : {0.9, 1.1, 2.5}) {
        for (double b : {0.5, 1.1, 3.0}) {
            const auto lhs = nominal_params(p, a * b);
            const auto rhs = nominal_params(nominal_params(p, a), b);
            CHECK(lhs.c_hy == doctest::Approx(rhs.c_hy).epsilon(1e-15));
            CHECK(lhs.beta == doctest::Approx(rhs.beta).epsilon(1e-15));
            CHECK(lhs.f == doctest::Approx(rhs.f).epsilon(1e-15));
            CHECK(lhs.tau_dot0 == doctest::Approx(rhs.tau_dot0).epsilon(1e-15));
            CHECK(lhs.t_a == doctest::Approx(rhs.t_a).epsilon(1e-15));
            CHECK(lhs.d_x == rhs.d_x);
        }
    }
}

TEST_CASE("serialize and reload is identity") {
    SimulationConfig c;
    c.grid_n = 32;
    c.seed = 12345678901234ULL;
    c.reservoir.c_hy = 1.0 / 3.0 * 1e-3;
    c.scenario.demand.kind = DemandKind::Square;
    c.scenario.demand.period_hr = 500.0;
    c.scenario.demand.duty = 0.3;
    c.scenario.demand.schedule = {{0.0, 1.0}, {100.0, 0.25}};
    c.controller.fixed_gains = true;
    c.controller.l = -0.3;
    c.env.extended_obs = true;
    c.regions[1].rect_km = {1.9, 2.1, 3.05, 2.95};

    const auto dir = testutil::temp_dir("cfg_rt");
    for (const SimulationConfig& src : {SimulationConfig{}, c}) {
        testutil::write_file(dir / "c.json", config_to_json(src).dump(2));
        const SimulationConfig back = load_config(dir / "c.json");
        CHECK(back == src);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("unit conversion") {
    CHECK(m3hr_to_km3hr(15.0) == doctest::Approx(1.5e-8).epsilon(1e-15));
    CHECK(km3hr_to_m3hr(m3hr_to_km3hr(15.0)) == doctest::Approx(15.0).epsilon(1e-15));
    CHECK(kHoursPerMonth == 730.5);
}
