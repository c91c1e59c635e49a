// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/world.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skillloop
{

enum class BatteryClass
{
    okay,
    low,
    critical,
};

std::string_view to_string(BatteryClass battery_class);

inline constexpr std::string_view unknown_location = "unknown";

/// Boundary values belong to the lower class.
BatteryClass discretize_battery(double percent, const BatteryThresholds& thresholds);

/// Closest location within `radius`; ties go to the lexicographically
/// smallest id. Returns "unknown" when nothing is in range.
std::string nearest_location(Point position, const std::map<std::string, Location>& locations, double radius);

/// Replaces every claim about `surface` with what is on it now.
ObservationBuffer record_perception(ObservationBuffer buffer, const WorldState& world, const std::string& surface);

/// Drops the buffered observation of an object leaving its surface.
void forget_object(ObservationBuffer& buffer, const std::string& object_id);

struct Predicate
{
    std::string name;
    std::vector<std::string> args;
    std::optional<std::int64_t> age;

    /// `name(a, b)` without the age suffix.
    std::string fact() const;
    std::string render() const;

    bool operator==(const Predicate&) const = default;
};

std::size_t predicate_arity(std::string_view name);

struct Snapshot
{
    std::int64_t tick = 0;
    std::vector<Predicate> predicates;
    std::string rendered_text;
};

std::string render_predicates(const std::vector<Predicate>& predicates);

Snapshot make_snapshot(const WorldState& world, const ObservationBuffer& buffer);
Snapshot make_snapshot(const WorldState& world);

/// Whether a surface was perceived recently enough to trust for placement.
bool surface_is_fresh(const WorldState& world, const std::string& surface);

} // namespace skillloop
