#include "fedmesh/scenario.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace fedmesh;

namespace {

std::string melbourne_text() { return fixtures::read_text(std::string(FEDMESH_SCENARIO_DIR) + "/melbourne-5.scn"); }

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    if (pos == std::string::npos) throw std::runtime_error("fixture edit failed: " + from);
    return text.replace(pos, from.size(), to);
}

bool has_field(const ParseResult& r, const std::string& field) {
    for (const auto& d : r.diagnostics)
        if (d.field == field) return true;
    return false;
}

int line_of(const std::string& text, const std::string& needle) {
    const auto pos = text.find(needle);
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace

TEST(Scenario, BundledMelbourneValidates) {
    const auto r = parse_scenario(melbourne_text());
    ASSERT_TRUE(r.diagnostics.empty()) << r.diagnostics.front().to_string();
    const auto& s = *r.scenario;
    EXPECT_EQ(s.clouds.size(), 5u);
    EXPECT_EQ(s.dims.size(), 4u);
    EXPECT_EQ(s.f_min, 3);
    EXPECT_EQ(s.seed, 42u);
    EXPECT_TRUE(s.eager_tickets);
    EXPECT_EQ(s.inbox_capacity, 1000u);
    for (const auto& c : s.clouds) EXPECT_EQ(c.node_count, 4);
    EXPECT_EQ(s.clouds[0].node_speed_ghz, 2.4);
    EXPECT_EQ(s.clouds[1].node_speed_ghz, 2.4);
    EXPECT_EQ(s.clouds[2].node_speed_ghz, 3.0);
    EXPECT_EQ(s.clouds[3].node_speed_ghz, 3.0);
    EXPECT_EQ(s.clouds[4].node_speed_ghz, 3.5);
    EXPECT_EQ(s.workloads.size(), 6u);
}

TEST(Scenario, SerializeRoundTrips) {
    const auto s = *parse_scenario(melbourne_text()).scenario;
    const auto text = serialize_scenario(s);
    const auto again = parse_scenario(text);
    ASSERT_TRUE(again.diagnostics.empty()) << again.diagnostics.front().to_string();
    EXPECT_EQ(serialize_scenario(*again.scenario), text);
}

TEST(Scenario, FminZeroNamesTheField) {
    const auto text = replace_once(melbourne_text(), "f_min = 3", "f_min = 0");
    const auto r = parse_scenario(text);
    EXPECT_FALSE(r.scenario);
    ASSERT_TRUE(has_field(r, "space.f_min"));
    for (const auto& d : r.diagnostics)
        if (d.field == "space.f_min") EXPECT_EQ(d.line, line_of(text, "f_min = 0"));
}

TEST(Scenario, UnknownCloudInWorkload) {
    const auto text = replace_once(melbourne_text(), "submit_cloud = \"cloud-3\"", "submit_cloud = \"cloud-9\"");
    const auto r = parse_scenario(text);
    EXPECT_FALSE(r.scenario);
    bool found = false;
    for (const auto& d : r.diagnostics) {
        if (d.message.find("cloud-9") != std::string::npos) {
            found = true;
            EXPECT_NE(d.field.find("submit_cloud"), std::string::npos);
            EXPECT_GT(d.line, 0);
        }
    }
    EXPECT_TRUE(found);
}

TEST(Scenario, SyntaxAndSchemaErrors) {
    EXPECT_TRUE(has_field(parse_scenario(replace_once(melbourne_text(), "nodes = 4", "nodez = 4")), "cloud[0].nodez"));
    EXPECT_TRUE(has_field(parse_scenario(replace_once(melbourne_text(), "nodes = 4", "nodes = \"four\"")),
                          "cloud[0].nodes"));
    EXPECT_TRUE(has_field(parse_scenario(replace_once(melbourne_text(), "nodes = 4", "nodes = 0")), "cloud[0].nodes"));
    EXPECT_TRUE(has_field(parse_scenario(replace_once(melbourne_text(), "schema_version = 1", "schema_version = 2")),
                          "schema_version"));
    const auto dup = replace_once(melbourne_text(), "id = \"cloud-2\"", "id = \"cloud-1\"");
    EXPECT_TRUE(has_field(parse_scenario(dup), "cloud[1].id"));
    EXPECT_FALSE(parse_scenario("[space\n").diagnostics.empty());
    EXPECT_FALSE(parse_scenario("seed = \"x\n").diagnostics.empty());
}

TEST(Scenario, GridSizeGuard) {
    auto s = *parse_scenario(melbourne_text()).scenario;
    s.f_min = s.f_max = 18;  // 18^4 = 104976 cells
    bool flagged = false;
    for (const auto& d : validate_scenario(s)) flagged = flagged || d.field == "space.f_min";
    EXPECT_TRUE(flagged);
    s.f_min = s.f_max = 17;  // 83521
    EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Scenario, EmptyWorkloadListIsValid) {
    auto text = melbourne_text();
    text = text.substr(0, text.find("[[workload]]"));
    const auto r = parse_scenario(text);
    ASSERT_TRUE(r.scenario);
    EXPECT_TRUE(r.scenario->workloads.empty());
}
