// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <skillloop/facts.hpp>

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace skillloop;
using namespace skillloop::testing;

namespace
{

bool has_fact(const Snapshot& snapshot, const std::string& fact)
{
    return std::ranges::any_of(snapshot.predicates, [&](const Predicate& p) { return p.fact() == fact; });
}

} // namespace

TEST_CASE("battery classes at and around the thresholds")
{
    const auto t = BatteryThresholds { 30, 10 };
    CHECK(discretize_battery(100, t) == BatteryClass::okay);
    CHECK(discretize_battery(30.0001, t) == BatteryClass::okay);
    CHECK(discretize_battery(30, t) == BatteryClass::low);
    CHECK(discretize_battery(10.5, t) == BatteryClass::low);
    CHECK(discretize_battery(10, t) == BatteryClass::critical);
    CHECK(discretize_battery(0, t) == BatteryClass::critical);
}

TEST_CASE("nearest location picks the closest within radius with the smaller id on ties")
{
    const auto locations = std::map<std::string, Location> {
        { "b", { "b", LocationKind::table, { 1, 0 } } },
        { "a", { "a", LocationKind::table, { -1, 0 } } },
        { "c", { "c", LocationKind::table, { 5, 5 } } },
    };
    CHECK(nearest_location({ 0, 0 }, locations, 2) == "a");
    CHECK(nearest_location({ 0.5, 0 }, locations, 2) == "b");
    CHECK(nearest_location({ 0, 0 }, locations, 0.5) == "unknown");
    CHECK(nearest_location({ 5, 5 }, locations, 0) == "c");
    CHECK(nearest_location({ 0, 0 }, {}, 10) == "unknown");
}

TEST_CASE("nearest location agrees with exhaustive comparison")
{
    auto rng = std::mt19937_64(7);
    auto coord = std::uniform_int_distribution<int>(-3, 3);
    for (auto trial = 0; trial < 300; ++trial)
    {
        auto locations = std::map<std::string, Location> {};
        const auto count = 1 + trial % 5;
        for (auto i = 0; i < count; ++i)
        {
            const auto id = fmt::format("l{}", (trial * 31 + i * 17) % 97);
            locations[id] = { id, LocationKind::table, { double(coord(rng)), double(coord(rng)) } };
        }
        const auto p = Point { double(coord(rng)), double(coord(rng)) };
        const auto radius = double(trial % 4);

        auto expected = std::string("unknown");
        auto best = 1e18;
        for (const auto& [id, loc]: locations)
        {
            const auto d2 = (loc.position.x - p.x) * (loc.position.x - p.x) + (loc.position.y - p.y) * (loc.position.y - p.y);
            if (d2 > radius * radius)
                continue;
            if (d2 < best || (d2 == best && id < expected))
            {
                best = d2;
                expected = id;
            }
        }
        CHECK(nearest_location(p, locations, radius) == expected);
    }
}

TEST_CASE("perception replaces everything buffered about the surface")
{
    auto world = indoor_world();
    world.tick = 5;
    auto buffer = record_perception({}, world, "table_1");
    CHECK(buffer.by_object.size() == 2);
    CHECK(buffer.surface_seen.at("table_1") == 5);

    // The screwdriver disappears from table_1; re-perceiving drops it.
    world.objects.at("screwdriver_1").placement = OnSurface { "table_2" };
    world.tick = 9;
    buffer = record_perception(buffer, world, "table_1");
    CHECK(buffer.by_object.size() == 1);
    CHECK(buffer.by_object.at("multimeter_1").observed_at == 9);
}

TEST_CASE("snapshots carry ages and exclude grasp state")
{
    auto world = advance(indoor_world(), "navigate", { "table_1" });
    world = advance(world, "perceive", { "table_1" });
    world = advance(world, "move_arm", { "transport" });
    auto snap = make_snapshot(world);
    CHECK(has_fact(snap, "at(robot, table_1)"));
    CHECK(has_fact(snap, "arm_posture(robot, transport)"));
    CHECK(snap.rendered_text.find("on(multimeter_1, table_1) [age=2]") != std::string::npos);

    world = advance(world, "pick", { "multimeter_1" });
    snap = make_snapshot(world);
    CHECK_FALSE(has_fact(snap, "on(multimeter_1, table_1)"));
    CHECK(snap.rendered_text.find("gripped") == std::string::npos);
    CHECK(snap.rendered_text.find("multimeter_1") == std::string::npos);

    // Predicates are sorted by name and arguments.
    CHECK(std::ranges::is_sorted(snap.predicates, [](const Predicate& a, const Predicate& b) {
        return std::tie(a.name, a.args) < std::tie(b.name, b.args);
    }));
}

TEST_CASE("outdoor snapshots report battery class and docking")
{
    auto world = outdoor_world(25);
    const auto snap = make_snapshot(world);
    CHECK(has_fact(snap, "battery(low)"));
    CHECK(has_fact(snap, "docked(true)"));
    CHECK(has_fact(snap, "at(robot, shelter)"));
    CHECK_FALSE(has_fact(snap, "arm_posture(robot, transport)"));
}

TEST_CASE("buffered facts go stale rather than updating themselves")
{
    auto world = advance(indoor_world(), "navigate", { "table_1" });
    world = advance(world, "perceive", { "table_1" });
    world.objects.at("multimeter_1").placement = OnSurface { "table_3" };  // a human moved it
    world.tick += 40;
    const auto snap = make_snapshot(world);
    CHECK(has_fact(snap, "on(multimeter_1, table_1)"));
    CHECK(snap.rendered_text.find("on(multimeter_1, table_1) [age=41]") != std::string::npos);
    CHECK_FALSE(surface_is_fresh(world, "table_1"));
}

TEST_CASE("in() facts persist while the container is carried")
{
    auto world = indoor_world();
    world.objects.at("multimeter_1").placement = InContainer { "box_1" };
    world = advance(world, "navigate", { "table_3" });
    world = advance(world, "perceive", { "table_3" });
    CHECK(has_fact(make_snapshot(world), "in(multimeter_1, box_1)"));
    world = advance(world, "pick", { "box_1" });
    const auto snap = make_snapshot(world);
    CHECK(has_fact(snap, "in(multimeter_1, box_1)"));
    CHECK_FALSE(has_fact(snap, "on(box_1, table_3)"));
}

TEST_CASE("random action sequences never leak unobserved or grasp facts")
{
    auto rng = std::mt19937_64(11);
    const auto base = indoor_world();
    const auto actions = std::vector<std::string> { "navigate", "perceive", "pick", "place", "insert", "move_arm" };
    auto objects = std::vector<std::string> {};
    for (const auto& [id, _]: base.objects)
        objects.push_back(id);
    auto locations = std::vector<std::string> {};
    for (const auto& [id, _]: base.locations)
        locations.push_back(id);
    const auto any = [&](const std::vector<std::string>& from) { return from[rng() % from.size()]; };

    for (auto run = 0; run < 50; ++run)
    {
        auto world = base;
        for (auto i = 0; i < 40; ++i)
        {
            const auto& action = actions[rng() % actions.size()];
            auto params = std::vector<std::string> {};
            if (action == "navigate" || action == "perceive")
                params = { any(locations) };
            else if (action == "pick")
                params = { any(objects) };
            else if (action == "place")
                params = { any(objects), any(locations) };
            else if (action == "insert")
                params = { any(objects), any(objects) };
            else
                params = { rng() % 2 ? "transport" : "observe" };
            world = advance(world, action, params);

            const auto snap = make_snapshot(world);
            for (const auto& p: snap.predicates)
            {
                CHECK(p.name != "gripped");
                if (p.name == "on" || p.name == "in")
                {
                    const auto& obs = world.observations.by_object.at(p.args[0]);
                    CHECK(world.observations.surface_seen.contains(obs.surface));
                    CHECK(p.age == world.tick - obs.observed_at);
                    CHECK(p.args[0] != world.robot.gripped_object.value_or(""));
                }
            }
        }
    }
}
