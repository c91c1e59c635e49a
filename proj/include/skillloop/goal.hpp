// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/world.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace skillloop
{

/// Ground-truth predicate used to check scenario goals, e.g. `on(box_1, table_2)`
/// or `not gripped(screwdriver_1)`.
///
/// Supported names: at(robot, L), on(o, L), in(o, c), arm_posture(robot, p),
/// gripped(o), battery(class), docked(true|false), scanned(poi), estop(true|false).
struct GoalPredicate
{
    bool negated = false;
    std::string name;
    std::vector<std::string> args;

    /// `name(a, b)` without negation.
    std::string fact() const;
    std::string text() const;
};

/// Throws std::invalid_argument on malformed text or unsupported names.
GoalPredicate parse_goal_predicate(std::string_view text);

bool holds(const GoalPredicate& predicate, const WorldState& world);

struct Goal
{
    std::string text;
    std::vector<GoalPredicate> predicates;
};

bool all_hold(const std::vector<GoalPredicate>& predicates, const WorldState& world);

} // namespace skillloop
