// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <skillloop/agents.hpp>
#include <skillloop/backend.hpp>
#include <skillloop/scenario.hpp>
#include <skillloop/world.hpp>

#include <fmt/format.h>

#include <deque>
#include <random>
#include <string>
#include <vector>

namespace skillloop::testing
{

inline std::string scenario_path(const std::string& name)
{
    return std::string(SKILLLOOP_SCENARIO_DIR) + "/" + name + ".yaml";
}

inline std::string policy_path(const std::string& name)
{
    return std::string(SKILLLOOP_POLICY_DIR) + "/" + name + ".yaml";
}

/// Every prompt section filled with a one-line placeholder.
inline std::string placeholder_prompt_yaml()
{
    auto out = std::string("prompt:\n");
    for (const auto& section: prompt_sections())
        out += fmt::format("  {}: \"{} text\"\n", section.key, section.title);
    return out;
}

/// Small indoor scenario document; `extra` is appended verbatim (goal,
/// config, operator_script, ...).
inline std::string indoor_scenario_yaml(const std::string& extra = "goal: [\"on(multimeter_1, table_2)\"]\n")
{
    return "id: small_indoor\n"
           "platform: indoor\n"
           "seed: 1\n"
           "today: \"2026-03-02\"\n"
           "utterance: bring the multimeter to table_2\n"
           "locations:\n"
           "  - {id: home, kind: home, x: 0, y: 0}\n"
           "  - {id: table_1, kind: table, x: 4, y: 0}\n"
           "  - {id: table_2, kind: table, x: 8, y: 0}\n"
           "objects:\n"
           "  - {id: multimeter_1, class: tool, on: table_1}\n"
           "  - {id: screwdriver_1, class: tool, on: table_1, grasp: hard}\n"
           "robot: {at: home, arm_posture: transport}\n"
           + extra + placeholder_prompt_yaml();
}

inline Scenario small_indoor_scenario(const std::string& extra = "goal: [\"on(multimeter_1, table_2)\"]\n")
{
    return parse_scenario(indoor_scenario_yaml(extra), "small_indoor");
}

/// home(0,0), table_1(4,0), table_2(8,0), table_3(4,5); robot at home.
inline WorldState indoor_world()
{
    auto world = WorldState {};
    world.config.platform = Platform::indoor;
    world.config.catalogue = default_catalogue(Platform::indoor);
    world.locations = {
        { "home", { "home", LocationKind::home, { 0, 0 } } },
        { "table_1", { "table_1", LocationKind::table, { 4, 0 } } },
        { "table_2", { "table_2", LocationKind::table, { 8, 0 } } },
        { "table_3", { "table_3", LocationKind::table, { 4, 5 } } },
    };
    const auto add = [&](std::string id, ObjectClass cls, Placement placement, GraspDifficulty grasp = GraspDifficulty::easy) {
        world.objects[id] = ObjectItem { .id = id, .object_class = cls, .placement = placement, .grasp_difficulty = grasp };
    };
    add("multimeter_1", ObjectClass::tool, OnSurface { "table_1" });
    add("screwdriver_1", ObjectClass::tool, OnSurface { "table_1" }, GraspDifficulty::hard);
    add("box_1", ObjectClass::container, OnSurface { "table_3" });
    add("power_drill_1", ObjectClass::tool, OnSurface { "table_3" });
    add("relay_1", ObjectClass::other, OnSurface { "table_2" });
    return world;
}

/// shelter(0,0), shelter_entry(3,0), poi_1..poi_5; robot docked.
inline WorldState outdoor_world(double battery = 90.0, double drain = 0.1)
{
    auto world = WorldState {};
    world.config.platform = Platform::outdoor;
    world.config.catalogue = default_catalogue(Platform::outdoor);
    world.config.battery_drain_per_meter = drain;
    world.config.location_match_radius = 2.0;
    world.locations = {
        { "shelter", { "shelter", LocationKind::shelter, { 0, 0 } } },
        { "shelter_entry", { "shelter_entry", LocationKind::shelter_entry, { 3, 0 } } },
        { "poi_1", { "poi_1", LocationKind::poi, { 15, 10 } } },
        { "poi_2", { "poi_2", LocationKind::poi, { 30, 15 } } },
        { "poi_3", { "poi_3", LocationKind::poi, { 45, 5 } } },
        { "poi_4", { "poi_4", LocationKind::poi, { 35, -15 } } },
        { "poi_5", { "poi_5", LocationKind::poi, { 15, -12 } } },
    };
    world.robot.battery_percent = battery;
    world.robot.docked = true;
    world.robot.in_shelter = true;
    return world;
}

inline StepResult step(const WorldState& world, std::string_view action, std::vector<std::string> params = {})
{
    return apply_action(world, action, params);
}

/// Applies an action and returns the next world; fails loudly on parameter errors.
inline WorldState advance(const WorldState& world, std::string_view action, std::vector<std::string> params = {})
{
    return apply_action(world, action, params).state;
}

/// Replays a fixed list of responses, then final text.
class QueueBackend final: public Backend
{
  public:
    explicit QueueBackend(std::vector<BackendResponse> responses, std::string final_text = "done")
      : responses_(responses.begin(), responses.end()), final_text_(std::move(final_text))
    {
    }

    BackendResponse complete(const BackendRequest& request) override
    {
        requests.push_back(request);
        if (responses_.empty())
            return FinalText { final_text_ };
        auto next = responses_.front();
        responses_.pop_front();
        return next;
    }

    bool handles(AgentRole role) const override { return role != AgentRole::critic; }
    std::string describe() const override { return "queue"; }

    std::vector<BackendRequest> requests;

  private:
    std::deque<BackendResponse> responses_;
    std::string final_text_;
};

/// Seeded random planner for property tests: a random mix of acts (valid and
/// invalid), snapshots, reflections and event checks. Routes everything to
/// the planner-executor and leaves the critic to the rule-based assessment.
class RandomBackend final: public Backend
{
  public:
    RandomBackend(std::uint64_t seed, WorldState world, std::size_t length)
      : rng_(seed), world_(std::move(world)), length_(length)
    {
    }

    BackendResponse complete(const BackendRequest& request) override
    {
        if (request.agent == AgentRole::router)
            return FinalText { "true" };
        if (emitted_++ >= length_)
            return FinalText { "stopping here" };

        const auto choice = pick(0, 9);
        if (choice == 0)
            return ToolCall { "check_events", nlohmann::json::object() };
        if (choice == 1)
            return ToolCall { "get_snapshot", nlohmann::json::object() };
        if (choice == 2)
            return ToolCall { "reflect", { { "text", "thinking" } } };
        if (choice == 3)
            return ToolCall { "check_events", nlohmann::json::object() };

        auto names = std::vector<std::string>(world_.config.catalogue.begin(), world_.config.catalogue.end());
        const auto action = names[pick(0, names.size() - 1)];
        const auto* signature = find_signature(action);
        auto params = nlohmann::json::array();
        for (std::size_t i = 0; i < signature->params.size(); ++i)
            params.push_back(random_param(signature->params[i]));
        return ToolCall { "act", { { "action", action }, { "params", params } } };
    }

    bool handles(AgentRole role) const override { return role != AgentRole::critic; }
    std::string describe() const override { return "random"; }

  private:
    std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

    std::string random_param(std::string_view name)
    {
        auto ids = std::vector<std::string> {};
        if (name.find("object") != std::string_view::npos || name.find("container") != std::string_view::npos)
            for (const auto& [id, _]: world_.objects)
                ids.push_back(id);
        else if (name == "posture")
            ids = { "transport", "observe", "other" };
        else if (name == "target_percent")
            ids = { "50", "80", "100" };
        else if (name == "text")
            ids = { "hello" };
        else
            for (const auto& [id, _]: world_.locations)
                ids.push_back(id);
        return ids[pick(0, ids.size() - 1)];
    }

    std::mt19937_64 rng_;
    WorldState world_;
    std::size_t length_;
    std::size_t emitted_ = 0;
};

} // namespace skillloop::testing
