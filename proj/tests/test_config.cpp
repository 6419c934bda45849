#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "edgesim/config.hpp"

using namespace edgesim;

namespace {

bool has_kind(const std::vector<Violation>& v, ViolationKind kind)
{
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

std::vector<Violation> violations_of(const Config& raw)
{
    try {
        validate_config(raw);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

}  // namespace

TEST_CASE("default config validates and carries the experiment constants")
{
    const Config c = default_config();
    CHECK(check_config(c).empty());
    CHECK(c.workloads == std::vector<double>{10, 20, 30});
    CHECK(c.envs == std::vector<std::string>{"Low", "Medium", "High"});
    CHECK(c.congestions == std::vector<double>{0.05, 0.2, 0.8});
    CHECK(c.battery_capacity == 1000.0);
    CHECK(c.cost.d0 == doctest::Approx(0.03));
    CHECK(c.cost.omega == doctest::Approx(0.2));
    CHECK(c.cost.phi == doctest::Approx(10.0));
    CHECK(c.power.server_peak_w == 200.0);
    CHECK(c.power.server_rate == 10.0);
    CHECK(c.power.base_station_w == 800.0);
    CHECK(c.pw.e_static == 200.0);
    CHECK(c.pw.e_peak == 50.0);
    CHECK(c.discount < 1.0);
    CHECK(c.battery_levels == 41);
    CHECK(c.op_steps == std::vector<int>{9, 10, 11});
}

TEST_CASE("single location at 20 u/s overloads at 30 u/s")
{
    Config c = default_config();
    c.locations = {{1.0, 20.0}};
    const auto v = violations_of(c);
    REQUIRE(has_kind(v, ViolationKind::UtilizationOverload));
}

TEST_CASE("d_op off the battery grid is rejected")
{
    Config c = default_config();
    c.power.base_station_w = 788.0;  // d_op(10) = 197 + 25 = 222 Wh
    const auto v = violations_of(c);
    CHECK(has_kind(v, ViolationKind::GridMisaligned));
}

TEST_CASE("empty sets and the full violation list")
{
    Config c = default_config();
    c.workloads.clear();
    c.workload_chain.matrix.clear();
    c.actions.clear();
    c.locations = {{1.0, 20.0}};
    c.discount = 1.5;
    const auto v = check_config(c);
    CHECK(std::count_if(v.begin(), v.end(), [](const Violation& x) { return x.kind == ViolationKind::EmptySet; }) >= 2);
    CHECK(has_kind(v, ViolationKind::InvalidValue));

    Config d = default_config();
    d.power.base_station_w = 788.0;
    d.locations = {{1.0, 20.0}};
    d.env_chain.matrix[0] = {0.5, 0.2, 0.2};
    const auto w = violations_of(d);
    CHECK(has_kind(w, ViolationKind::GridMisaligned));
    CHECK(has_kind(w, ViolationKind::UtilizationOverload));
    CHECK(has_kind(w, ViolationKind::NonStochastic));
}

TEST_CASE("unknown keys are rejected")
{
    auto doc = serialize_config(default_config());
    doc["cost"]["omgea"] = 0.3;
    try {
        parse_config(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_kind(e.violations(), ViolationKind::UnknownKey));
    }
}

TEST_CASE("state enumeration")
{
    const Config c = default_config();
    const auto states = enumerate_states(c);
    CHECK(states.size() == 1107);
    CHECK(states == enumerate_states(c));

    const StateSpace space(c);
    for (std::size_t i = 0; i < states.size(); ++i) {
        CHECK(space.index_of(states[i]) == i);
        CHECK(space.state_of(i) == states[i]);
    }
    // (lambda, e, h, b) lexicographic, battery minor
    CHECK(states[1] == SystemState{0, 0, 0, 1});
    CHECK(states[41] == SystemState{0, 0, 1, 0});
    CHECK(states[41 * 3] == SystemState{0, 1, 0, 0});
    CHECK(states[41 * 9] == SystemState{1, 0, 0, 0});
}

TEST_CASE("singleton sets with two battery levels")
{
    Config c = default_config();
    c.workloads = {10};
    c.workload_chain.matrix = {{1.0}};
    c.envs = {"Low"};
    c.env_chain.matrix = {{1.0}};
    c.congestions = {0.05};
    c.congestion_chain.matrix = {{1.0}};
    c.green.classes = {{0.0, 0.0}};
    c.green.cap = 250.0;
    c.battery_capacity = 250.0;
    c.battery_step = 250.0;
    c.power.dynamic_w_per_unit = 50.0;  // d_op(10) = 125 + 125 = 250 Wh
    c.power.base_station_w = 500.0;
    c.actions = {0.0};
    c.initial = {10.0, "Low", 0.05, 0.0};
    const Config v = validate_config(c);
    const auto states = enumerate_states(v);
    REQUIRE(states.size() == 2);
    CHECK(states[0].battery == 0);
    CHECK(states[1].battery == 1);
}

TEST_CASE("config round trip")
{
    const Config c = default_config();
    const Config back = parse_config(serialize_config(c));
    CHECK(back.same_inputs(c));
    CHECK(serialize_config(back) == serialize_config(c));

    const Config r = reduced_config();
    CHECK(parse_config(serialize_config(r)).same_inputs(r));
    CHECK(r.battery_levels == 11);
}

TEST_CASE("shipped config files match the built-in setups")
{
    const std::string root = EDGESIM_SOURCE_DIR;
    CHECK(load_config(root + "/configs/default.json").same_inputs(default_config()));
    CHECK(load_config(root + "/configs/reduced.json").same_inputs(reduced_config()));
}

TEST_CASE("value lookups")
{
    const Config c = default_config();
    const SystemState s = make_state(c, 30, "High", 0.8, 275);
    CHECK(s == SystemState{2, 2, 2, 11});
    CHECK_THROWS_AS(make_state(c, 15, "High", 0.8, 275), std::out_of_range);
    CHECK_THROWS_AS(make_state(c, 10, "High", 0.8, 260), std::out_of_range);
    CHECK(action_index(c, 100) == 4);
}
