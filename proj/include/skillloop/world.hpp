// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace skillloop
{

struct Point
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

enum class Platform
{
    indoor,
    outdoor,
};

enum class LocationKind
{
    table,
    poi,
    shelter,
    shelter_entry,
    home,
};

struct Location
{
    std::string id;
    LocationKind kind = LocationKind::table;
    Point position;

    bool operator==(const Location&) const = default;
};

enum class ObjectClass
{
    tool,
    container,
    other,
};

enum class GraspDifficulty
{
    easy,
    hard,
};

struct OnSurface
{
    std::string location;
    bool operator==(const OnSurface&) const = default;
};

struct InContainer
{
    std::string container;
    bool operator==(const InContainer&) const = default;
};

struct Gripped
{
    bool operator==(const Gripped&) const = default;
};

using Placement = std::variant<OnSurface, InContainer, Gripped>;

struct ObjectItem
{
    std::string id;
    ObjectClass object_class = ObjectClass::other;
    std::set<std::string> aliases;
    Placement placement = OnSurface {};
    GraspDifficulty grasp_difficulty = GraspDifficulty::easy;

    bool operator==(const ObjectItem&) const = default;
};

enum class ArmPosture
{
    transport,
    observe,
    other,
};

struct RobotState
{
    Point position;
    ArmPosture arm_posture = ArmPosture::transport;
    std::optional<std::string> gripped_object;
    bool estop_engaged = false;
    double battery_percent = 100.0;
    bool docked = false;
    bool in_shelter = false;

    bool operator==(const RobotState&) const = default;
};

struct BatteryThresholds
{
    double low = 30.0;
    double critical = 10.0;

    bool operator==(const BatteryThresholds&) const = default;
};

struct WorldConfig
{
    Platform platform = Platform::indoor;
    std::set<std::string> catalogue;
    double battery_drain_per_meter = 0.0;
    BatteryThresholds battery_thresholds;
    double location_match_radius = 1.0;
    std::int64_t freshness_window = 30;
    std::map<std::string, int> surface_capacity;
    /// Keyed by action name; "pick:hard" overrides "pick" for hard-to-grasp objects.
    std::map<std::string, double> failure_rates;
    double speed = 1.0;        // meters per tick
    double charge_rate = 5.0;  // percent per tick
    /// Placement onto a surface that was never perceived is rejected.
    bool strict_placement = false;

    bool operator==(const WorldConfig&) const = default;

    /// Throws std::invalid_argument on out-of-range thresholds or probabilities.
    void validate() const;
};

/// A single buffered perception result. `container` is set when the object
/// was seen inside a container standing on `surface`.
struct Observation
{
    std::string object_id;
    std::string surface;
    std::optional<std::string> container;
    std::int64_t observed_at = 0;

    bool operator==(const Observation&) const = default;
};

struct ObservationBuffer
{
    std::map<std::string, Observation> by_object;
    std::map<std::string, std::int64_t> surface_seen;

    bool operator==(const ObservationBuffer&) const = default;
};

struct WorldState
{
    std::int64_t tick = 0;
    RobotState robot;
    std::map<std::string, ObjectItem> objects;
    std::map<std::string, Location> locations;
    ObservationBuffer observations;
    std::uint64_t rng_seed = 0;
    std::map<std::string, std::uint64_t> failure_draws;
    std::set<std::string> scanned;
    std::vector<std::string> transcript;
    std::deque<std::string> heard;
    WorldConfig config;

    bool operator==(const WorldState&) const = default;
};

struct ActionOutcome
{
    bool success = false;
    std::string status_text;
    std::int64_t ticks_elapsed = 1;
};

/// Text event raised by the simulator, to be injected on the event bus.
struct EmittedEvent
{
    std::string text;
    std::int64_t tick = 0;
};

struct StepResult
{
    WorldState state;
    ActionOutcome outcome;
    std::vector<EmittedEvent> events;
    std::int64_t started_at = 0;
    std::int64_t ended_at = 0;
};

/// Raised for unknown actions, wrong arity or malformed parameter values.
/// Distinct from an execution failure: the world is left untouched.
class ParameterError: public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct ActionSignature
{
    std::string_view name;
    std::vector<std::string_view> params;
    std::string_view doc;
    std::set<Platform> platforms;
};

const std::vector<ActionSignature>& action_signatures();
const ActionSignature* find_signature(std::string_view action);
std::string render_signature(const ActionSignature& signature);
std::set<std::string> default_catalogue(Platform platform);

/// Executes one high level action to completion. Never delivers events or
/// yields control mid-action; simulator events are returned in the result.
StepResult apply_action(const WorldState& state, std::string_view action, std::span<const std::string> params);

/// Drains `distance * battery_drain_per_meter` percent, floored at 0. A class
/// transition appends "battery state changed to <class>" to `emitted`.
WorldState simulate_battery(WorldState state, double distance, std::vector<EmittedEvent>& emitted);

/// Changes battery by `delta` percent (clamped to [0, 100]) with the same
/// transition reporting as simulate_battery.
WorldState adjust_battery(WorldState state, double delta, std::vector<EmittedEvent>& emitted);

WorldState set_estop(WorldState state, bool engaged, std::vector<EmittedEvent>& emitted);

/// Uniform draw in [0, 1) that depends only on (seed, key, index).
double failure_draw(std::uint64_t seed, std::string_view key, std::uint64_t index);

/// Consumes the next draw for `key` and compares it to the configured rate.
/// Keys without a configured rate never fail and consume nothing.
bool inject_failure_decision(WorldState& state, std::string_view key);

std::string_view to_string(Platform platform);
std::string_view to_string(LocationKind kind);
std::string_view to_string(ObjectClass object_class);
std::string_view to_string(GraspDifficulty difficulty);
std::string_view to_string(ArmPosture posture);

Platform parse_platform(std::string_view text);
LocationKind parse_location_kind(std::string_view text);
ObjectClass parse_object_class(std::string_view text);
GraspDifficulty parse_grasp_difficulty(std::string_view text);
ArmPosture parse_arm_posture(std::string_view text);

/// Canonical text dump of the full ground truth; equal states dump equally.
std::string describe_state(const WorldState& state);
std::uint64_t state_fingerprint(const WorldState& state);

/// Location id the robot currently stands at, or "unknown".
std::string robot_location(const WorldState& state);

/// Id of the surface an object ultimately rests on, following containers.
std::optional<std::string> resting_surface(const WorldState& state, const std::string& object_id);

} // namespace skillloop
