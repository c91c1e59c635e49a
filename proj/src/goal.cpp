// SPDX-License-Identifier: Apache-2.0
#include <skillloop/facts.hpp>
#include <skillloop/goal.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace skillloop
{

namespace
{

const std::map<std::string, std::size_t, std::less<>>& supported_arities()
{
    static const auto arities = std::map<std::string, std::size_t, std::less<>> {
        { "at", 2 },      { "on", 2 },      { "in", 2 },      { "arm_posture", 2 }, { "gripped", 1 },
        { "battery", 1 }, { "docked", 1 }, { "scanned", 1 }, { "estop", 1 },
    };
    return arities;
}

std::string_view trim(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    return text;
}

bool parse_bool_arg(const std::string& text)
{
    if (text == "true")
        return true;
    if (text == "false")
        return false;
    throw std::invalid_argument("expected true or false, got '" + text + "'");
}

} // namespace

std::string GoalPredicate::fact() const
{
    return fmt::format("{}({})", name, fmt::join(args, ", "));
}

std::string GoalPredicate::text() const
{
    return negated ? "not " + fact() : fact();
}

GoalPredicate parse_goal_predicate(std::string_view text)
{
    auto rest = trim(text);
    auto predicate = GoalPredicate {};
    if (rest.starts_with("not ") || rest.starts_with("not\t"))
    {
        predicate.negated = true;
        rest = trim(rest.substr(4));
    }
    const auto open = rest.find('(');
    if (open == std::string_view::npos || rest.empty() || rest.back() != ')')
        throw std::invalid_argument(fmt::format("malformed predicate '{}'; expected name(arg, ...)", text));
    predicate.name = std::string(trim(rest.substr(0, open)));
    auto inner = rest.substr(open + 1, rest.size() - open - 2);
    while (!inner.empty())
    {
        const auto comma = inner.find(',');
        const auto arg = trim(inner.substr(0, comma));
        if (arg.empty())
            throw std::invalid_argument(fmt::format("empty argument in predicate '{}'", text));
        predicate.args.emplace_back(arg);
        if (comma == std::string_view::npos)
            break;
        inner.remove_prefix(comma + 1);
    }

    const auto arity = supported_arities().find(predicate.name);
    if (arity == supported_arities().end())
        throw std::invalid_argument(fmt::format("unsupported predicate '{}'", predicate.name));
    if (arity->second != predicate.args.size())
        throw std::invalid_argument(
            fmt::format("predicate '{}' takes {} argument(s), got {}", predicate.name, arity->second, predicate.args.size()));
    if (predicate.name == "docked" || predicate.name == "estop")
        parse_bool_arg(predicate.args[0]);
    return predicate;
}

bool holds(const GoalPredicate& predicate, const WorldState& world)
{
    const auto& name = predicate.name;
    const auto& args = predicate.args;
    auto value = false;

    const auto object_placement = [&](const std::string& id) -> const Placement* {
        const auto it = world.objects.find(id);
        return it == world.objects.end() ? nullptr : &it->second.placement;
    };

    if (name == "at")
        value = args[0] == "robot" && robot_location(world) == args[1];
    else if (name == "on")
    {
        const auto* placement = object_placement(args[0]);
        const auto* on = placement != nullptr ? std::get_if<OnSurface>(placement) : nullptr;
        value = on != nullptr && on->location == args[1];
    }
    else if (name == "in")
    {
        const auto* placement = object_placement(args[0]);
        const auto* inside = placement != nullptr ? std::get_if<InContainer>(placement) : nullptr;
        value = inside != nullptr && inside->container == args[1];
    }
    else if (name == "arm_posture")
        value = args[0] == "robot" && to_string(world.robot.arm_posture) == args[1];
    else if (name == "gripped")
        value = world.robot.gripped_object == args[0];
    else if (name == "battery")
        value = to_string(discretize_battery(world.robot.battery_percent, world.config.battery_thresholds)) == args[0];
    else if (name == "docked")
        value = world.robot.docked == parse_bool_arg(args[0]);
    else if (name == "scanned")
        value = world.scanned.contains(args[0]);
    else if (name == "estop")
        value = world.robot.estop_engaged == parse_bool_arg(args[0]);

    return predicate.negated ? !value : value;
}

bool all_hold(const std::vector<GoalPredicate>& predicates, const WorldState& world)
{
    return std::ranges::all_of(predicates, [&](const auto& p) { return holds(p, world); });
}

} // namespace skillloop
