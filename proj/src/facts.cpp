// SPDX-License-Identifier: Apache-2.0
#include <skillloop/facts.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <limits>

namespace skillloop
{

std::string_view to_string(BatteryClass battery_class)
{
    switch (battery_class)
    {
        case BatteryClass::okay: return "okay";
        case BatteryClass::low: return "low";
        case BatteryClass::critical: return "critical";
    }
    return "okay";
}

BatteryClass discretize_battery(double percent, const BatteryThresholds& thresholds)
{
    if (percent <= thresholds.critical)
        return BatteryClass::critical;
    if (percent <= thresholds.low)
        return BatteryClass::low;
    return BatteryClass::okay;
}

std::string nearest_location(Point position, const std::map<std::string, Location>& locations, double radius)
{
    // std::map iterates ids in ascending order, so strict < keeps the smallest id on ties.
    const Location* best = nullptr;
    auto best_distance = std::numeric_limits<double>::infinity();
    for (const auto& [id, location]: locations)
    {
        const auto d = distance(position, location.position);
        if (d < best_distance)
        {
            best = &location;
            best_distance = d;
        }
    }
    if (best == nullptr || best_distance > radius)
        return std::string(unknown_location);
    return best->id;
}

ObservationBuffer record_perception(ObservationBuffer buffer, const WorldState& world, const std::string& surface)
{
    std::erase_if(buffer.by_object, [&](const auto& entry) { return entry.second.surface == surface; });

    for (const auto& [id, object]: world.objects)
    {
        if (const auto* on = std::get_if<OnSurface>(&object.placement); on != nullptr && on->location == surface)
        {
            buffer.by_object[id] = Observation { .object_id = id, .surface = surface, .observed_at = world.tick };
        }
        else if (const auto* inside = std::get_if<InContainer>(&object.placement))
        {
            const auto& container = world.objects.at(inside->container);
            const auto* container_on = std::get_if<OnSurface>(&container.placement);
            if (container_on != nullptr && container_on->location == surface)
            {
                buffer.by_object[id] = Observation {
                    .object_id = id,
                    .surface = surface,
                    .container = inside->container,
                    .observed_at = world.tick,
                };
            }
        }
    }
    buffer.surface_seen[surface] = world.tick;
    return buffer;
}

void forget_object(ObservationBuffer& buffer, const std::string& object_id)
{
    buffer.by_object.erase(object_id);
}

std::string Predicate::fact() const
{
    return fmt::format("{}({})", name, fmt::join(args, ", "));
}

std::string Predicate::render() const
{
    if (age)
        return fmt::format("{} [age={}]", fact(), *age);
    return fact();
}

std::size_t predicate_arity(std::string_view name)
{
    if (name == "battery" || name == "docked")
        return 1;
    return 2;
}

std::string render_predicates(const std::vector<Predicate>& predicates)
{
    auto out = std::string {};
    for (const auto& predicate: predicates)
    {
        out += predicate.render();
        out += '\n';
    }
    return out;
}

Snapshot make_snapshot(const WorldState& world, const ObservationBuffer& buffer)
{
    auto snapshot = Snapshot { .tick = world.tick };
    auto& facts = snapshot.predicates;

    facts.push_back({ "at", { "robot", robot_location(world) }, std::nullopt });
    if (world.config.platform == Platform::indoor)
    {
        facts.push_back({ "arm_posture", { "robot", std::string(to_string(world.robot.arm_posture)) }, std::nullopt });
    }
    else
    {
        const auto battery = discretize_battery(world.robot.battery_percent, world.config.battery_thresholds);
        facts.push_back({ "battery", { std::string(to_string(battery)) }, std::nullopt });
        facts.push_back({ "docked", { world.robot.docked ? "true" : "false" }, std::nullopt });
    }

    for (const auto& [id, obs]: buffer.by_object)
    {
        const auto age = world.tick - obs.observed_at;
        if (obs.container)
            facts.push_back({ "in", { id, *obs.container }, age });
        else
            facts.push_back({ "on", { id, obs.surface }, age });
    }

    std::ranges::sort(facts, [](const Predicate& a, const Predicate& b) {
        return std::tie(a.name, a.args) < std::tie(b.name, b.args);
    });
    snapshot.rendered_text = render_predicates(facts);
    return snapshot;
}

Snapshot make_snapshot(const WorldState& world)
{
    return make_snapshot(world, world.observations);
}

bool surface_is_fresh(const WorldState& world, const std::string& surface)
{
    const auto seen = world.observations.surface_seen.find(surface);
    return seen != world.observations.surface_seen.end() && world.tick - seen->second <= world.config.freshness_window;
}

} // namespace skillloop
