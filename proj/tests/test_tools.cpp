// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <skillloop/facts.hpp>
#include <skillloop/tools.hpp>

#include <doctest.h>

using namespace skillloop;
using namespace skillloop::testing;
using json = nlohmann::json;

namespace
{

struct Harness
{
    WorldState world = indoor_world();
    EventBus bus;
    ExecutionLog log;
    std::vector<StepResult> steps;

    ToolResult call(const std::string& tool, json arguments = json::object())
    {
        auto context = ToolContext { world, bus, log, [this](const StepResult& s) { steps.push_back(s); } };
        return dispatch(ToolCall { tool, std::move(arguments) }, context);
    }

    ToolResult act(const std::string& action, std::vector<std::string> params = {})
    {
        return call("act", { { "action", action }, { "params", params } });
    }
};

} // namespace

TEST_CASE("reflect acknowledges and logs without touching the world")
{
    auto h = Harness {};
    const auto before = describe_state(h.world);
    const auto r = h.call("reflect", { { "text", "plan: go to table_1" } });
    CHECK(r.ok);
    CHECK(r.kind == ResultKind::ack);
    CHECK(describe_state(h.world) == before);
    REQUIRE(h.log.size() == 1);
    CHECK(h.log.entries()[0].kind == EntryKind::reflection);
}

TEST_CASE("act executes one action and reports its interval")
{
    auto h = Harness {};
    const auto r = h.act("navigate", { "table_1" });
    CHECK(r.ok);
    CHECK(r.kind == ResultKind::status);
    CHECK(r.text == "success: arrived at table_1");
    CHECK(r.details["started_at"] == 0);
    CHECK(r.details["ended_at"] == 4);
    CHECK(h.world.tick == 4);
    CHECK(h.steps.size() == 1);
}

TEST_CASE("unknown actions are parameter errors listing the catalogue")
{
    auto h = Harness {};
    const auto before = describe_state(h.world);
    const auto r = h.act("fly", { "paris" });
    CHECK_FALSE(r.ok);
    CHECK(r.kind == ResultKind::parameter_error);
    CHECK(r.text.find("navigate") != std::string::npos);
    CHECK(describe_state(h.world) == before);
    CHECK(h.steps.empty());
}

TEST_CASE("act payload schema is strict")
{
    auto h = Harness {};
    const auto before = describe_state(h.world);
    const auto payloads = std::vector<json> {
        json::array(),
        json("navigate"),
        { { "action", "navigate" } },
        { { "params", { "table_1" } } },
        { { "action", "navigate" }, { "params", { "table_1" } }, { "speed", 2 } },
        { { "action", 3 }, { "params", { "table_1" } } },
        { { "action", "navigate" }, { "params", "table_1" } },
        { { "action", "navigate" }, { "params", { 1 } } },
        { { "action", "navigate" }, { "params", { { { "id", "table_1" } } } } },
        { { "action", "navigate" }, { "params", json::array() } },
    };
    for (const auto& payload: payloads)
    {
        CAPTURE(payload.dump());
        CHECK(h.call("act", payload).kind == ResultKind::parameter_error);
    }
    CHECK(describe_state(h.world) == before);
    CHECK(h.bus.pending() == 0);
}

TEST_CASE("other tools reject arguments and unknown names")
{
    auto h = Harness {};
    CHECK(h.call("get_snapshot", { { "verbose", true } }).kind == ResultKind::parameter_error);
    CHECK(h.call("check_events", { { "all", true } }).kind == ResultKind::parameter_error);
    CHECK(h.call("reflect", { { "text", "x" }, { "mood", "ok" } }).kind == ResultKind::parameter_error);
    CHECK(h.call("reflect", { { "text", "" } }).kind == ResultKind::parameter_error);
    CHECK(h.call("teleport").kind == ResultKind::parameter_error);
    const auto speak = h.call("speak", { { "text", "hi" } });
    CHECK(speak.kind == ResultKind::parameter_error);
    CHECK(speak.text.find("act") != std::string::npos);
}

TEST_CASE("check_events reports 'no events' and logs each consumed event")
{
    auto h = Harness {};
    CHECK(h.call("check_events").text == "no events");
    h.bus.inject("user: hurry", 0);
    h.act("navigate", { "table_2" });
    const auto r = h.call("check_events");
    CHECK(r.kind == ResultKind::events);
    CHECK(r.text == "user: hurry");
    const auto entries = h.log.entries();
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].kind == EntryKind::event);
    CHECK(entries[0].payload["consumed_at"] == 8);
    CHECK(h.call("check_events").text == "no events");
}

TEST_CASE("simulator events are queued, not delivered")
{
    auto h = Harness {};
    h.world = outdoor_world(31, 0.1);
    h.world.robot.docked = false;
    h.world.robot.in_shelter = false;
    h.world.robot.position = { 3, 0 };
    const auto r = h.act("navigate", { "poi_1" });
    CHECK(r.ok);
    CHECK(r.text.find("battery") == std::string::npos);
    CHECK(h.bus.pending() == 1);
    CHECK(h.call("check_events").text == "battery state changed to low");
}

TEST_CASE("get_snapshot returns the partial view")
{
    auto h = Harness {};
    const auto r = h.call("get_snapshot");
    CHECK(r.kind == ResultKind::snapshot);
    CHECK(r.text == "arm_posture(robot, transport)\nat(robot, home)\n");
}

TEST_CASE("chatbot tools are read-only")
{
    const auto world = indoor_world();
    auto log = ExecutionLog {};
    auto context = ChatbotContext { world, "2026-03-02", log };
    const auto before = describe_state(world);

    CHECK(dispatch_chatbot({ "get_today_date" }, context).text == "2026-03-02");
    CHECK(dispatch_chatbot({ "get_available_locations" }, context).text == "home, table_1, table_2, table_3");
    CHECK(dispatch_chatbot({ "get_snapshot" }, context).kind == ResultKind::snapshot);
    const auto spoken = dispatch_chatbot({ "speak", { { "text", "hello" } } }, context);
    CHECK(spoken.ok);
    CHECK(spoken.details["spoken"] == "hello");

    const auto act = dispatch_chatbot({ "act", { { "action", "navigate" }, { "params", { "table_1" } } } }, context);
    CHECK(act.kind == ResultKind::parameter_error);
    CHECK(dispatch_chatbot({ "reflect", { { "text", "x" } } }, context).kind == ResultKind::parameter_error);
    CHECK(describe_state(world) == before);
}

TEST_CASE("tool documentation per agent")
{
    const auto planner = describe_tools(AgentRole::planner_executor, Platform::indoor);
    CHECK(planner.find("tools: speak, act, reflect, get_snapshot, check_events") != std::string::npos);
    CHECK(planner.find("navigate(location_id)") != std::string::npos);
    CHECK(planner.find("insert(object_id, container_id)") != std::string::npos);
    CHECK(planner.find("dock()") == std::string::npos);

    const auto outdoor = describe_tools(AgentRole::planner_executor, Platform::outdoor);
    CHECK(outdoor.find("charge(target_percent)") != std::string::npos);
    CHECK(outdoor.find("pick(") == std::string::npos);

    const auto chatbot = describe_tools(AgentRole::chatbot, Platform::indoor);
    CHECK(chatbot.find("get_today_date") != std::string::npos);
    CHECK(chatbot.find("act(") == std::string::npos);

    CHECK(describe_tools(AgentRole::router, Platform::indoor).find("tools: none") != std::string::npos);
    CHECK(describe_tools(AgentRole::critic, Platform::indoor).find("tools: none") != std::string::npos);
    CHECK_THROWS_AS(describe_tools("janitor", "indoor"), std::invalid_argument);
}

TEST_CASE("function schemas forbid additional properties")
{
    const auto schemas = tool_schemas(AgentRole::planner_executor, default_catalogue(Platform::indoor));
    REQUIRE(schemas.size() == 4);
    auto names = std::set<std::string> {};
    for (const auto& tool: schemas)
    {
        names.insert(tool["function"]["name"].get<std::string>());
        CHECK(tool["function"]["parameters"]["additionalProperties"] == false);
    }
    CHECK(names == std::set<std::string> { "act", "reflect", "get_snapshot", "check_events" });
    const auto& act = schemas[0]["function"]["parameters"];
    CHECK(act["required"] == json::array({ "action", "params" }));
    CHECK(act["properties"]["action"]["enum"].size() == default_catalogue(Platform::indoor).size());

    CHECK(tool_schemas(AgentRole::chatbot, {}).size() == 4);
    CHECK(tool_schemas(AgentRole::router, {}).empty());
}
