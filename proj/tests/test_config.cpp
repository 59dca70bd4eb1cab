#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "relbc/config.hpp"

namespace cf = relbc::config;
namespace hn = relbc::harness;
namespace pr = relbc::protocols;
namespace qm = relbc::quantum;
using nlohmann::json;
using relbc::bitmath::BitString;

namespace {

// Parsing must fail with a diagnostic that names the offending field.
void expect_field_error(const json& j, const std::string& field_in_message) {
    try {
        (void)cf::scenario_from_json(j);
        FAIL_CHECK("expected parse failure mentioning '" << field_in_message << "'");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(field_in_message) != std::string::npos);
    }
}

hn::Scenario maximal_scenario() {
    hn::Scenario sc;
    sc.name = "kitchen-sink";
    sc.flow = hn::Flow::Single;
    sc.coordinated = false;
    sc.repeat = 7;
    sc.randomize_commit_bit = true;
    sc.randomize_decline = true;

    sc.config.variant = pr::Variant::CHSH1;
    sc.config.dual = false;
    sc.config.n = 2;
    sc.config.xi = 0.07;
    sc.config.c_param = 0.5;
    sc.config.delta = 0.125;
    sc.config.loss_fraction = 0.25;
    sc.config.seed = 987654321;
    sc.config.travel_speed = 0.5;
    sc.config.placement = pr::VerifierPlacement::CommitSite;
    sc.config.l0 = BitString::parse("01");
    sc.config.layout.commit_point = {1.25, 0.25, 0.0, 0.0};
    sc.config.layout.unveil_points[0] = {0.5, -1.5, 0.5, 0.0};
    sc.config.layout.unveil_points[1] = {0.25, 2.0, 0.0, -0.5};

    sc.alice.commit_bit = 1;
    sc.alice.unveil0 = false;
    sc.alice.invoke_without_unveil = true;
    relbc::adversary::ReducedStrategy strat;
    strat.d_offset = BitString::parse("01");
    strat.response = {BitString::parse("00"), BitString::parse("01"), BitString::parse("10"),
                      BitString::parse("11")};
    sc.alice.chsh_strategy = std::move(strat);
    relbc::adversary::RccbcStrategy rstrat;
    rstrat.s0_full = BitString::parse("0011");
    rstrat.s1_full = BitString::parse("0101");
    sc.alice.rccbc_strategy = std::move(rstrat);

    qm::DeviceSpec rigged;
    rigged.kind = qm::DeviceKind::Malicious;
    rigged.delta = 0.01;
    rigged.loss_fraction = 1.0;
    qm::DeviceRule rule;
    rule.when.near_point = relbc::geometry::SpacetimePoint{1.25, 0.25, 0.0, 0.0};
    rule.when.near_radius = 0.125;
    rule.when.setting_is = 1;
    rule.when.memory_is = 3;
    rule.output = qm::OutputExpr::Setting;
    rule.memory = qm::MemoryExpr::StoreSetting;
    rigged.program.rules.push_back(rule);
    qm::DeviceRule fallback;
    fallback.output = qm::OutputExpr::SharedBit;
    fallback.memory = qm::MemoryExpr::Clear;
    rigged.program.rules.push_back(fallback);
    sc.a_side_override = rigged;

    qm::DeviceSpec noisy;
    noisy.delta = 0.25;
    sc.b_side_override = noisy;
    return sc;
}

}  // namespace

TEST_CASE("an empty object yields the default scenario") {
    const auto sc = cf::scenario_from_json(json::object());
    CHECK(sc.name.empty());
    CHECK(sc.flow == hn::Flow::Single);
    CHECK(sc.repeat == 1);
    CHECK(sc.coordinated);
    CHECK_FALSE(sc.randomize_commit_bit);
    CHECK(sc.config.variant == pr::Variant::CHSH1);
    CHECK(sc.config.n == 8);
    CHECK(sc.config.xi == 0.05);
    CHECK(sc.config.c_param == 1.0);
    CHECK(sc.config.delta == 0.0);
    CHECK(sc.config.loss_fraction == 0.5);
    CHECK(sc.config.travel_speed == 0.9);
    CHECK(sc.config.placement == pr::VerifierPlacement::EarliestJoint);
    CHECK_FALSE(sc.config.l0.has_value());
    CHECK(sc.alice.commit_bit == 0);
    CHECK(sc.alice.unveil0);
    CHECK_FALSE(sc.a_side_override.has_value());
    CHECK_FALSE(sc.b_side_override.has_value());
}

TEST_CASE("serialization round-trips every field") {
    const auto original = maximal_scenario();
    const json j = cf::scenario_to_json(original);
    const auto parsed = cf::scenario_from_json(j);
    CHECK(cf::scenario_to_json(parsed) == j);

    CHECK(parsed.name == "kitchen-sink");
    CHECK_FALSE(parsed.coordinated);
    CHECK(parsed.repeat == 7);
    CHECK(parsed.randomize_commit_bit);
    CHECK(parsed.randomize_decline);
    CHECK(parsed.config.xi == 0.07);
    CHECK(parsed.config.delta == 0.125);
    CHECK(parsed.config.loss_fraction == 0.25);
    CHECK(parsed.config.seed == 987654321);
    CHECK(parsed.config.travel_speed == 0.5);
    CHECK(parsed.config.placement == pr::VerifierPlacement::CommitSite);
    REQUIRE(parsed.config.l0.has_value());
    CHECK(parsed.config.l0->str() == "01");
    CHECK(parsed.config.layout.commit_point ==
          relbc::geometry::SpacetimePoint{1.25, 0.25, 0.0, 0.0});
    CHECK(parsed.config.layout.unveil_points[0] ==
          relbc::geometry::SpacetimePoint{0.5, -1.5, 0.5, 0.0});
    CHECK(parsed.config.layout.unveil_points[1] ==
          relbc::geometry::SpacetimePoint{0.25, 2.0, 0.0, -0.5});

    CHECK(parsed.alice.commit_bit == 1);
    CHECK_FALSE(parsed.alice.unveil0);
    CHECK(parsed.alice.unveil1);
    CHECK(parsed.alice.invoke_without_unveil);
    REQUIRE(parsed.alice.chsh_strategy.has_value());
    CHECK(parsed.alice.chsh_strategy->d_offset.str() == "01");
    REQUIRE(parsed.alice.chsh_strategy->response.size() == 4);
    CHECK(parsed.alice.chsh_strategy->response[2].str() == "10");
    REQUIRE(parsed.alice.rccbc_strategy.has_value());
    CHECK(parsed.alice.rccbc_strategy->s0_full.str() == "0011");
    CHECK(parsed.alice.rccbc_strategy->s1_full.str() == "0101");

    REQUIRE(parsed.a_side_override.has_value());
    CHECK(parsed.a_side_override->kind == qm::DeviceKind::Malicious);
    CHECK(parsed.a_side_override->delta == 0.01);
    CHECK(parsed.a_side_override->loss_fraction == 1.0);
    REQUIRE(parsed.a_side_override->program.rules.size() == 2);
    const auto& rule = parsed.a_side_override->program.rules[0];
    REQUIRE(rule.when.near_point.has_value());
    CHECK(rule.when.near_point->x == 0.25);
    CHECK(rule.when.near_radius == 0.125);
    CHECK(rule.when.setting_is == 1);
    CHECK(rule.when.memory_is == 3);
    CHECK(rule.output == qm::OutputExpr::Setting);
    CHECK(rule.memory == qm::MemoryExpr::StoreSetting);
    CHECK(parsed.a_side_override->program.rules[1].output == qm::OutputExpr::SharedBit);
    CHECK(parsed.a_side_override->program.rules[1].memory == qm::MemoryExpr::Clear);
    REQUIRE(parsed.b_side_override.has_value());
    CHECK(parsed.b_side_override->kind == qm::DeviceKind::HonestSinglet);
    CHECK(parsed.b_side_override->delta == 0.25);
}

TEST_CASE("every builtin scenario round-trips") {
    for (const auto& name : hn::builtin_scenario_names()) {
        const auto sc = hn::builtin_scenario(name);
        const json j = cf::scenario_to_json(sc);
        const auto parsed = cf::scenario_from_json(j);
        CHECK(cf::scenario_to_json(parsed) == j);
    }
}

TEST_CASE("null commit bit means declining") {
    const auto sc = cf::scenario_from_json(json::parse(R"({"alice": {"commit_bit": null}})"));
    CHECK_FALSE(sc.alice.commit_bit.has_value());
    const json back = cf::scenario_to_json(sc);
    CHECK(back["alice"]["commit_bit"].is_null());
}

TEST_CASE("the serialized shape uses the documented keys") {
    const json j = cf::scenario_to_json(hn::builtin_scenario("hiding-location"));
    CHECK(j["flow"] == "single");
    CHECK(j["config"]["variant"] == "chsh1");
    CHECK(j["config"]["placement"] == "earliest-joint");
    CHECK(j["config"]["layout"]["commit"].is_array());
    CHECK(j["config"]["layout"]["commit"].size() == 4);
    CHECK(j["alice"]["commit_bit"] == 0);
    REQUIRE(j.contains("devices"));
    CHECK(j["devices"].contains("a_side"));
    CHECK_FALSE(j["devices"].contains("b_side"));
    CHECK(j["devices"]["a_side"]["kind"] == "malicious");
    CHECK(j["devices"]["a_side"]["rules"][0]["output"] == "setting");
    CHECK(j["devices"]["a_side"]["rules"][0]["near"].size() == 4);

    // No override, no devices key.
    CHECK_FALSE(cf::scenario_to_json(hn::builtin_scenario("honest-chsh1")).contains("devices"));
}

TEST_CASE("diagnostics name the offending field") {
    expect_field_error(json::array(), "(root)");
    expect_field_error(json::parse(R"({"flow": "sideways"})"), "flow");
    expect_field_error(json::parse(R"({"repeat": -1})"), "repeat");
    expect_field_error(json::parse(R"({"config": []})"), "config");
    expect_field_error(json::parse(R"({"config": {"variant": "chsh9"}})"), "config.variant");
    expect_field_error(json::parse(R"({"config": {"n": -3}})"), "config.n");
    expect_field_error(json::parse(R"({"config": {"xi": "big"}})"), "config.xi");
    expect_field_error(json::parse(R"({"config": {"seed": -1}})"), "config.seed");
    expect_field_error(json::parse(R"({"config": {"placement": "elsewhere"}})"),
                       "config.placement");
    expect_field_error(json::parse(R"({"config": {"l0": "01a"}})"), "config.l0");
    expect_field_error(json::parse(R"({"config": {"l0": 7}})"), "config.l0");
    expect_field_error(json::parse(R"({"config": {"layout": {}}})"), "config.layout.commit");
    expect_field_error(
        json::parse(R"({"config": {"layout": {"commit": [0, 0, 0],
                        "unveil0": [0,0,0,0], "unveil1": [0,0,0,0]}}})"),
        "config.layout.commit");
    expect_field_error(json::parse(R"({"alice": {"commit_bit": 2}})"), "alice.commit_bit");
    expect_field_error(json::parse(R"({"alice": {"commit_bit": "yes"}})"), "alice.commit_bit");
    expect_field_error(json::parse(R"({"alice": {"chsh_strategy": {"d": "01"}}})"),
                       "alice.chsh_strategy.response");
    expect_field_error(
        json::parse(R"({"alice": {"chsh_strategy": {"d": "2x", "response": []}}})"),
        "alice.chsh_strategy.d");
    expect_field_error(
        json::parse(R"({"alice": {"chsh_strategy": {"d": "0", "response": ["0", "q"]}}})"),
        "alice.chsh_strategy.response[1]");
    expect_field_error(json::parse(R"({"alice": {"rccbc_strategy": {"s0": "01"}}})"),
                       "alice.rccbc_strategy.s1");
    expect_field_error(json::parse(R"({"devices": {"a_side": {"kind": "evil"}}})"),
                       "devices.a_side.kind");
    expect_field_error(
        json::parse(R"({"devices": {"b_side": {"rules": [{"output": "pigeon"}]}}})"),
        "devices.b_side.rules[0].output");
    expect_field_error(
        json::parse(R"({"devices": {"b_side": {"rules": [{"memory": "eternal"}]}}})"),
        "devices.b_side.rules[0].memory");
    expect_field_error(json::parse(R"({"devices": {"a_side": {"rules": [{"near": [0, 0]}]}}})"),
                       "devices.a_side.rules[0].near");
    expect_field_error(json::parse(R"({"devices": {"a_side": {"rules": 5}}})"),
                       "devices.a_side.rules");
}

TEST_CASE("scenario files load and save") {
    const std::string path = "/tmp/relbc-test-scenario.json";
    const auto original = maximal_scenario();
    cf::save_scenario_file(original, path);
    const auto loaded = cf::load_scenario_file(path);
    CHECK(cf::scenario_to_json(loaded) == cf::scenario_to_json(original));
    std::remove(path.c_str());

    CHECK_THROWS_AS((void)cf::load_scenario_file("/tmp/relbc-no-such-file-1b2c.json"),
                    std::invalid_argument);

    const std::string broken = "/tmp/relbc-test-broken.json";
    {
        std::ofstream out(broken);
        out << "{ \"flow\": \"single\",";
    }
    try {
        (void)cf::load_scenario_file(broken);
        FAIL_CHECK("expected a parse diagnostic");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find(broken) != std::string::npos);
        CHECK(msg.find("parse") != std::string::npos);
    }
    std::remove(broken.c_str());

    CHECK_THROWS_AS(cf::save_scenario_file(original, "/tmp/no-such-dir-9z/x.json"),
                    std::runtime_error);
}
