// SPDX-License-Identifier: Apache-2.0
#include <skillloop/facts.hpp>
#include <skillloop/world.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

constexpr auto indoor_only = std::initializer_list<Platform> { Platform::indoor };
constexpr auto outdoor_only = std::initializer_list<Platform> { Platform::outdoor };
constexpr auto both_platforms = std::initializer_list<Platform> { Platform::indoor, Platform::outdoor };

ActionOutcome success(std::string text, std::int64_t ticks = 1)
{
    return ActionOutcome { .success = true, .status_text = "success: " + std::move(text), .ticks_elapsed = ticks };
}

ActionOutcome failure(std::string text, std::int64_t ticks = 1)
{
    return ActionOutcome { .success = false, .status_text = "failure: " + std::move(text), .ticks_elapsed = ticks };
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text)
{
    auto hash = std::uint64_t { 0xcbf29ce484222325ULL };
    for (auto c: text)
    {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string join_catalogue(const WorldConfig& config)
{
    auto out = std::string {};
    for (const auto& name: config.catalogue)
    {
        if (const auto* sig = find_signature(name))
        {
            if (!out.empty())
                out += ", ";
            out += render_signature(*sig);
        }
    }
    return out;
}

std::string join_ids(const auto& map)
{
    auto out = std::string {};
    for (const auto& [id, _]: map)
    {
        if (!out.empty())
            out += ", ";
        out += id;
    }
    return out;
}

void require_location(const WorldState& state, const std::string& id)
{
    if (!state.locations.contains(id))
        throw ParameterError(fmt::format("unknown location '{}'; known locations: {}", id, join_ids(state.locations)));
}

void require_object(const WorldState& state, const std::string& id)
{
    if (!state.objects.contains(id))
        throw ParameterError(fmt::format("unknown object '{}'; use canonical object ids", id));
}

void validate_call(const WorldState& state, std::string_view action, std::span<const std::string> params)
{
    const auto* sig = find_signature(action);
    if (sig == nullptr || !state.config.catalogue.contains(std::string(action)))
        throw ParameterError(
            fmt::format("unknown action '{}'; permitted actions: {}", action, join_catalogue(state.config)));

    if (params.size() != sig->params.size())
        throw ParameterError(fmt::format("{} expects {} positional parameter(s): {}; got {}",
                                         action,
                                         sig->params.size(),
                                         render_signature(*sig),
                                         params.size()));

    if (action == "navigate" || action == "perceive" || action == "scan")
        require_location(state, params[0]);
    else if (action == "pick")
        require_object(state, params[0]);
    else if (action == "place")
    {
        require_object(state, params[0]);
        require_location(state, params[1]);
    }
    else if (action == "insert")
    {
        require_object(state, params[0]);
        require_object(state, params[1]);
    }
    else if (action == "move_arm")
    {
        if (params[0] != "transport" && params[0] != "observe")
            throw ParameterError(fmt::format("move_arm posture must be one of: transport, observe; got '{}'", params[0]));
    }
    else if (action == "speak")
    {
        if (params[0].empty())
            throw ParameterError("speak requires non-empty text: speak(text)");
    }
    else if (action == "charge")
    {
        char* end = nullptr;
        const auto& text = params[0];
        const auto value = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value) || value < 0.0 || value > 100.0)
            throw ParameterError(fmt::format("charge target must be a number in [0, 100]: charge(target_percent); got '{}'", text));
    }
}

const Location* find_location_of_kind(const WorldState& state, LocationKind kind)
{
    for (const auto& [_, location]: state.locations)
        if (location.kind == kind)
            return &location;
    return nullptr;
}

bool container_is_loaded(const WorldState& state, const std::string& container_id)
{
    return std::ranges::any_of(state.objects, [&](const auto& entry) {
        const auto* inside = std::get_if<InContainer>(&entry.second.placement);
        return inside != nullptr && inside->container == container_id;
    });
}

std::string estop_arm_status()
{
    return "emergency stop engaged: arm cannot be actuated";
}

std::string estop_base_status()
{
    return "emergency stop engaged: base cannot move";
}

void release_grip(WorldState& state)
{
    state.robot.gripped_object.reset();
    state.robot.arm_posture = ArmPosture::other;
}

ActionOutcome do_navigate(WorldState& state, const std::string& target, std::vector<EmittedEvent>& events)
{
    if (state.robot.estop_engaged)
        return failure(estop_base_status());

    const auto& destination = state.locations.at(target);
    if (state.config.platform == Platform::indoor)
    {
        if (state.robot.arm_posture != ArmPosture::transport)
            return failure("arm not in transport posture; move_arm(transport) before navigating");
    }
    else
    {
        if (state.robot.docked || state.robot.in_shelter)
            return failure("cannot drive while in shelter/docked; undock first");
        if (destination.kind == LocationKind::shelter)
            return failure("the shelter can only be entered by docking from shelter_entry");
        if (state.robot.battery_percent <= 0.0)
            return failure("battery depleted; robot cannot move");
    }

    const auto start_tick = state.tick;
    const auto origin = state.robot.position;
    const auto total = distance(origin, destination.position);
    const auto speed = state.config.speed;
    const auto steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(total / speed - 1e-9)));
    const auto drains = state.config.platform == Platform::outdoor;

    for (auto step = std::int64_t { 1 }; step <= steps; ++step)
    {
        const auto fraction = total > 0.0 ? std::min(1.0, static_cast<double>(step) * speed / total) : 1.0;
        const auto previous = state.robot.position;
        state.robot.position = step == steps ? destination.position
                                             : Point { origin.x + (destination.position.x - origin.x) * fraction,
                                                       origin.y + (destination.position.y - origin.y) * fraction };
        state.tick = start_tick + step;
        if (drains)
        {
            state = simulate_battery(std::move(state), distance(previous, state.robot.position), events);
            if (state.robot.battery_percent <= 0.0 && step < steps)
            {
                return failure(fmt::format("battery depleted after {:.1f} m; robot stopped before reaching {}",
                                           distance(origin, state.robot.position),
                                           target),
                               step);
            }
        }
    }
    return success(fmt::format("arrived at {}", target), steps);
}

ActionOutcome do_move_arm(WorldState& state, const std::string& posture_text)
{
    if (state.robot.estop_engaged)
        return failure(estop_arm_status());
    const auto posture = parse_arm_posture(posture_text);
    if (state.robot.arm_posture == posture)
        return success(fmt::format("arm already in {} posture", posture_text));
    state.robot.arm_posture = posture;
    return success(fmt::format("arm moved to {} posture", posture_text));
}

ActionOutcome do_perceive(WorldState& state, const std::string& surface)
{
    if (state.robot.estop_engaged)
        return failure(estop_arm_status());
    const auto here = robot_location(state);
    if (here != surface)
        return failure(fmt::format("robot is at {}, not at {}; cannot perceive it from here", here, surface));
    if (const auto& held = state.robot.gripped_object;
        held && state.objects.at(*held).object_class == ObjectClass::container && container_is_loaded(state, *held))
        return failure(fmt::format("perceiving would invert loaded container {} and spill its contents", *held));

    state.observations = record_perception(std::move(state.observations), state, surface);
    state.robot.arm_posture = ArmPosture::observe;
    const auto seen = std::ranges::count_if(state.observations.by_object,
                                            [&](const auto& entry) { return entry.second.surface == surface; });
    return success(fmt::format("perceived {}; {} object(s) recorded", surface, seen));
}

ActionOutcome do_pick(WorldState& state, const std::string& object_id)
{
    if (state.robot.estop_engaged)
        return failure(estop_arm_status());
    if (state.robot.gripped_object)
        return failure(fmt::format("gripper already holds {}; one object at a time", *state.robot.gripped_object));

    const auto here = robot_location(state);
    const auto belief = state.observations.by_object.find(object_id);
    if (belief == state.observations.by_object.end() || belief->second.surface != here)
        return failure(fmt::format("{} has not been perceived at {}; perceive first", object_id, here));
    if (resting_surface(state, object_id) != here)
        return failure(fmt::format("{} not found at {}; the buffered observation is stale", object_id, here));

    auto& object = state.objects.at(object_id);
    auto key = std::string("pick");
    if (object.grasp_difficulty == GraspDifficulty::hard && state.config.failure_rates.contains("pick:hard"))
        key = "pick:hard";
    if (inject_failure_decision(state, key))
        return failure(fmt::format("grasp failed: infeasible grasp for {}", object_id));

    object.placement = Gripped {};
    state.robot.gripped_object = object_id;
    state.robot.arm_posture = ArmPosture::other;
    forget_object(state.observations, object_id);
    return success(fmt::format("picked {}", object_id));
}

ActionOutcome do_place(WorldState& state, const std::string& object_id, const std::string& surface)
{
    if (state.robot.estop_engaged)
        return failure(estop_arm_status());
    if (state.robot.gripped_object != object_id)
        return failure(fmt::format("not holding {}", object_id));
    const auto here = robot_location(state);
    if (here != surface)
        return failure(fmt::format("robot is at {}, not at {}", here, surface));
    if (state.locations.at(surface).kind != LocationKind::table)
        return failure(fmt::format("{} is not a placement surface", surface));
    if (state.config.strict_placement && !state.observations.surface_seen.contains(surface))
        return failure(fmt::format("{} has never been perceived; placing on unperceived surfaces is forbidden", surface));

    const auto fresh = surface_is_fresh(state, surface);
    const auto occupied = std::ranges::count_if(state.objects, [&](const auto& entry) {
        const auto* on = std::get_if<OnSurface>(&entry.second.placement);
        return on != nullptr && on->location == surface;
    });
    if (const auto capacity = state.config.surface_capacity.find(surface);
        capacity != state.config.surface_capacity.end() && occupied >= capacity->second)
    {
        return fresh ? failure(fmt::format("no free space on {}", surface))
                     : failure(fmt::format("no free space on {}; placed without fresh perception", surface));
    }
    if (inject_failure_decision(state, "place"))
        return failure(fmt::format("no feasible place pose for {} on {}", object_id, surface));

    state.objects.at(object_id).placement = OnSurface { surface };
    release_grip(state);
    if (fresh)
        return success(fmt::format("placed {} on {}", object_id, surface));
    return success(fmt::format("placed {} on {} (placed without fresh perception)", object_id, surface));
}

ActionOutcome do_insert(WorldState& state, const std::string& object_id, const std::string& container_id)
{
    if (state.robot.estop_engaged)
        return failure(estop_arm_status());
    if (state.robot.gripped_object != object_id)
        return failure(fmt::format("not holding {}", object_id));
    const auto& container = state.objects.at(container_id);
    if (container.object_class != ObjectClass::container)
        return failure(fmt::format("{} is not a container", container_id));
    if (state.objects.at(object_id).object_class == ObjectClass::container)
        return failure("containers cannot be placed inside containers");
    const auto here = robot_location(state);
    const auto* on = std::get_if<OnSurface>(&container.placement);
    if (on == nullptr || on->location != here)
        return failure(fmt::format("{} is not standing on {}", container_id, here));
    const auto belief = state.observations.by_object.find(container_id);
    if (belief == state.observations.by_object.end() || belief->second.surface != here)
        return failure(fmt::format("{} has not been perceived at {}; perceive first", container_id, here));
    if (inject_failure_decision(state, "insert"))
        return failure(fmt::format("insertion of {} into {} failed: unreachable pose", object_id, container_id));

    state.objects.at(object_id).placement = InContainer { container_id };
    release_grip(state);
    return success(fmt::format("inserted {} into {}", object_id, container_id));
}

ActionOutcome do_dock(WorldState& state)
{
    if (state.robot.estop_engaged)
        return failure(estop_base_status());
    if (state.robot.docked)
        return failure("already docked");
    const auto here = robot_location(state);
    const auto* entry = find_location_of_kind(state, LocationKind::shelter_entry);
    const auto* shelter = find_location_of_kind(state, LocationKind::shelter);
    if (entry == nullptr || shelter == nullptr)
        return failure("this world has no shelter");
    if (here != entry->id)
        return failure(fmt::format("robot is at {}; docking requires the designated entry pose {}", here, entry->id));
    state.robot.position = shelter->position;
    state.robot.in_shelter = true;
    state.robot.docked = true;
    return success("docked at charging station");
}

ActionOutcome do_undock(WorldState& state)
{
    if (state.robot.estop_engaged)
        return failure(estop_base_status());
    if (!state.robot.docked)
        return failure("not docked");
    const auto* entry = find_location_of_kind(state, LocationKind::shelter_entry);
    state.robot.docked = false;
    state.robot.in_shelter = false;
    if (entry != nullptr)
        state.robot.position = entry->position;
    return success(fmt::format("undocked; robot at {}", entry != nullptr ? entry->id : std::string(unknown_location)));
}

ActionOutcome do_charge(WorldState& state, const std::string& target_text, std::vector<EmittedEvent>& events)
{
    if (!state.robot.docked)
        return failure("charging requires being docked at the charging station");
    const auto target = std::strtod(target_text.c_str(), nullptr);
    const auto current = state.robot.battery_percent;
    if (target <= current)
        return success(fmt::format("battery already at {:.0f}%", current));

    const auto start_tick = state.tick;
    const auto steps = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil((target - current) / state.config.charge_rate - 1e-9)));
    for (auto step = std::int64_t { 1 }; step <= steps; ++step)
    {
        state.tick = start_tick + step;
        const auto next = step == steps ? target : std::min(target, current + static_cast<double>(step) * state.config.charge_rate);
        state = adjust_battery(std::move(state), next - state.robot.battery_percent, events);
    }
    return success(fmt::format("charged to {:.0f}%", target), steps);
}

ActionOutcome do_scan(WorldState& state, const std::string& poi)
{
    if (state.robot.docked)
        return failure("cannot scan while docked");
    const auto here = robot_location(state);
    if (here != poi)
        return failure(fmt::format("robot is at {}, not at {}", here, poi));
    if (inject_failure_decision(state, "scan"))
        return failure(fmt::format("scan of {} failed: sensor error", poi));
    state.scanned.insert(poi);
    return success(fmt::format("scan of {} completed", poi));
}

ActionOutcome do_listen(WorldState& state)
{
    if (state.heard.empty())
        return success("nothing heard");
    auto text = std::move(state.heard.front());
    state.heard.pop_front();
    return success("heard: " + text);
}

template <typename Enum>
Enum parse_enum(std::string_view text, std::initializer_list<Enum> values, std::string_view what)
{
    for (auto value: values)
        if (to_string(value) == text)
            return value;
    throw std::invalid_argument(fmt::format("unknown {} '{}'", what, text));
}

json placement_json(const Placement& placement)
{
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, OnSurface>)
                return { { "on", p.location } };
            else if constexpr (std::is_same_v<T, InContainer>)
                return { { "in", p.container } };
            else
                return "gripped";
        },
        placement);
}

} // namespace

double distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

void WorldConfig::validate() const
{
    const auto& t = battery_thresholds;
    if (!(0.0 <= t.critical && t.critical < t.low && t.low <= 100.0))
        throw std::invalid_argument(fmt::format(
            "battery thresholds must satisfy 0 <= critical < low <= 100 (got critical={}, low={})", t.critical, t.low));
    for (const auto& [action, rate]: failure_rates)
        if (!(rate >= 0.0 && rate <= 1.0))
            throw std::invalid_argument(fmt::format("failure rate for '{}' must lie in [0, 1] (got {})", action, rate));
    if (!(speed > 0.0))
        throw std::invalid_argument("speed must be positive");
    if (!(charge_rate > 0.0))
        throw std::invalid_argument("charge_rate must be positive");
    if (battery_drain_per_meter < 0.0)
        throw std::invalid_argument("battery_drain_per_meter must be non-negative");
    if (location_match_radius < 0.0)
        throw std::invalid_argument("location_match_radius must be non-negative");
    if (freshness_window < 0)
        throw std::invalid_argument("freshness_window must be non-negative");
}

const std::vector<ActionSignature>& action_signatures()
{
    static const auto signatures = std::vector<ActionSignature> {
        { "navigate", { "location_id" }, "Drive to a known location. Indoor: arm must be in transport posture. Outdoor: not while docked or inside the shelter.", both_platforms },
        { "move_arm", { "posture" }, "Move the arm to 'transport' or 'observe'.", indoor_only },
        { "perceive", { "location_id" }, "Observe the surface the robot stands at and refresh the snapshot. Fails while holding a loaded container.", indoor_only },
        { "pick", { "object_id" }, "Grasp a perceived object at the current location. One object at a time.", indoor_only },
        { "place", { "object_id", "location_id" }, "Put the held object on the table the robot stands at.", indoor_only },
        { "insert", { "object_id", "container_id" }, "Put the held object into a perceived container at the current location.", indoor_only },
        { "speak", { "text" }, "Say text to the user.", both_platforms },
        { "listen", {}, "Return the oldest pending user utterance, or 'nothing heard'.", both_platforms },
        { "dock", {}, "Enter the shelter and dock. Requires being at shelter_entry.", outdoor_only },
        { "undock", {}, "Leave the charging station; the robot ends at shelter_entry.", outdoor_only },
        { "charge", { "target_percent" }, "Charge to the target state of charge. Requires being docked.", outdoor_only },
        { "scan", { "location_id" }, "Scan plants at the point of interest the robot stands at.", outdoor_only },
    };
    return signatures;
}

const ActionSignature* find_signature(std::string_view action)
{
    for (const auto& sig: action_signatures())
        if (sig.name == action)
            return &sig;
    return nullptr;
}

std::string render_signature(const ActionSignature& signature)
{
    auto out = std::string(signature.name) + "(";
    for (auto i = std::size_t { 0 }; i < signature.params.size(); ++i)
    {
        if (i != 0)
            out += ", ";
        out += signature.params[i];
    }
    return out + ")";
}

std::set<std::string> default_catalogue(Platform platform)
{
    auto out = std::set<std::string> {};
    for (const auto& sig: action_signatures())
        if (sig.platforms.contains(platform))
            out.emplace(sig.name);
    return out;
}

StepResult apply_action(const WorldState& state, std::string_view action, std::span<const std::string> params)
{
    validate_call(state, action, params);

    auto result = StepResult { .state = state };
    result.started_at = state.tick;
    auto& next = result.state;

    if (action == "navigate")
        result.outcome = do_navigate(next, params[0], result.events);
    else if (action == "move_arm")
        result.outcome = do_move_arm(next, params[0]);
    else if (action == "perceive")
        result.outcome = do_perceive(next, params[0]);
    else if (action == "pick")
        result.outcome = do_pick(next, params[0]);
    else if (action == "place")
        result.outcome = do_place(next, params[0], params[1]);
    else if (action == "insert")
        result.outcome = do_insert(next, params[0], params[1]);
    else if (action == "speak")
    {
        next.transcript.push_back(params[0]);
        result.outcome = success("completed speech");
    }
    else if (action == "listen")
        result.outcome = do_listen(next);
    else if (action == "dock")
        result.outcome = do_dock(next);
    else if (action == "undock")
        result.outcome = do_undock(next);
    else if (action == "charge")
        result.outcome = do_charge(next, params[0], result.events);
    else if (action == "scan")
        result.outcome = do_scan(next, params[0]);

    next.tick = result.started_at + result.outcome.ticks_elapsed;
    result.ended_at = next.tick;
    return result;
}

WorldState adjust_battery(WorldState state, double delta, std::vector<EmittedEvent>& emitted)
{
    const auto& thresholds = state.config.battery_thresholds;
    const auto before = discretize_battery(state.robot.battery_percent, thresholds);
    state.robot.battery_percent = std::clamp(state.robot.battery_percent + delta, 0.0, 100.0);
    const auto after = discretize_battery(state.robot.battery_percent, thresholds);
    if (before != after)
        emitted.push_back({ fmt::format("battery state changed to {}", to_string(after)), state.tick });
    return state;
}

WorldState simulate_battery(WorldState state, double distance_m, std::vector<EmittedEvent>& emitted)
{
    if (distance_m < 0.0)
        throw std::invalid_argument("distance must be non-negative");
    if (distance_m == 0.0)
        return state;
    const auto drain = distance_m * state.config.battery_drain_per_meter;
    return adjust_battery(std::move(state), -drain, emitted);
}

WorldState set_estop(WorldState state, bool engaged, std::vector<EmittedEvent>& emitted)
{
    if (state.robot.estop_engaged == engaged)
        return state;
    state.robot.estop_engaged = engaged;
    emitted.push_back({ engaged ? "emergency stop engaged" : "emergency stop released", state.tick });
    return state;
}

double failure_draw(std::uint64_t seed, std::string_view key, std::uint64_t index)
{
    auto x = splitmix64(seed);
    x = splitmix64(x ^ fnv1a(key));
    x = splitmix64(x ^ index);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

bool inject_failure_decision(WorldState& state, std::string_view key)
{
    const auto rate = state.config.failure_rates.find(std::string(key));
    if (rate == state.config.failure_rates.end())
        return false;
    auto& counter = state.failure_draws[std::string(key)];
    const auto draw = failure_draw(state.rng_seed, key, counter++);
    return draw < rate->second;
}

std::string_view to_string(Platform platform)
{
    return platform == Platform::indoor ? "indoor" : "outdoor";
}

std::string_view to_string(LocationKind kind)
{
    switch (kind)
    {
        case LocationKind::table: return "table";
        case LocationKind::poi: return "poi";
        case LocationKind::shelter: return "shelter";
        case LocationKind::shelter_entry: return "shelter_entry";
        case LocationKind::home: return "home";
    }
    return "table";
}

std::string_view to_string(ObjectClass object_class)
{
    switch (object_class)
    {
        case ObjectClass::tool: return "tool";
        case ObjectClass::container: return "container";
        case ObjectClass::other: return "other";
    }
    return "other";
}

std::string_view to_string(GraspDifficulty difficulty)
{
    return difficulty == GraspDifficulty::easy ? "easy" : "hard";
}

std::string_view to_string(ArmPosture posture)
{
    switch (posture)
    {
        case ArmPosture::transport: return "transport";
        case ArmPosture::observe: return "observe";
        case ArmPosture::other: return "other";
    }
    return "other";
}

Platform parse_platform(std::string_view text)
{
    return parse_enum(text, { Platform::indoor, Platform::outdoor }, "platform");
}

LocationKind parse_location_kind(std::string_view text)
{
    return parse_enum(text,
                      { LocationKind::table, LocationKind::poi, LocationKind::shelter, LocationKind::shelter_entry,
                        LocationKind::home },
                      "location kind");
}

ObjectClass parse_object_class(std::string_view text)
{
    return parse_enum(text, { ObjectClass::tool, ObjectClass::container, ObjectClass::other }, "object class");
}

GraspDifficulty parse_grasp_difficulty(std::string_view text)
{
    return parse_enum(text, { GraspDifficulty::easy, GraspDifficulty::hard }, "grasp difficulty");
}

ArmPosture parse_arm_posture(std::string_view text)
{
    return parse_enum(text, { ArmPosture::transport, ArmPosture::observe, ArmPosture::other }, "arm posture");
}

std::string describe_state(const WorldState& state)
{
    auto objects = json::object();
    for (const auto& [id, object]: state.objects)
    {
        objects[id] = {
            { "class", to_string(object.object_class) },
            { "aliases", object.aliases },
            { "placement", placement_json(object.placement) },
            { "grasp_difficulty", to_string(object.grasp_difficulty) },
        };
    }
    auto locations = json::object();
    for (const auto& [id, location]: state.locations)
        locations[id] = { { "kind", to_string(location.kind) }, { "x", location.position.x }, { "y", location.position.y } };

    auto observations = json::object();
    for (const auto& [id, obs]: state.observations.by_object)
    {
        observations[id] = { { "surface", obs.surface }, { "observed_at", obs.observed_at } };
        if (obs.container)
            observations[id]["container"] = *obs.container;
    }

    const auto& robot = state.robot;
    const auto& config = state.config;
    auto doc = json {
        { "tick", state.tick },
        { "platform", to_string(config.platform) },
        { "robot",
          {
              { "x", robot.position.x },
              { "y", robot.position.y },
              { "location", robot_location(state) },
              { "arm_posture", to_string(robot.arm_posture) },
              { "gripped_object", robot.gripped_object ? json(*robot.gripped_object) : json(nullptr) },
              { "estop_engaged", robot.estop_engaged },
              { "battery_percent", robot.battery_percent },
              { "docked", robot.docked },
              { "in_shelter", robot.in_shelter },
          } },
        { "objects", objects },
        { "locations", locations },
        { "observations", observations },
        { "surface_seen", state.observations.surface_seen },
        { "rng_seed", state.rng_seed },
        { "failure_draws", state.failure_draws },
        { "scanned", state.scanned },
        { "transcript", state.transcript },
        { "heard", std::vector<std::string>(state.heard.begin(), state.heard.end()) },
        { "config",
          {
              { "catalogue", config.catalogue },
              { "battery_drain_per_meter", config.battery_drain_per_meter },
              { "battery_thresholds", { { "low", config.battery_thresholds.low }, { "critical", config.battery_thresholds.critical } } },
              { "location_match_radius", config.location_match_radius },
              { "freshness_window", config.freshness_window },
              { "surface_capacity", config.surface_capacity },
              { "failure_rates", config.failure_rates },
              { "speed", config.speed },
              { "charge_rate", config.charge_rate },
              { "strict_placement", config.strict_placement },
          } },
    };
    return doc.dump();
}

std::uint64_t state_fingerprint(const WorldState& state)
{
    return fnv1a(describe_state(state));
}

std::string robot_location(const WorldState& state)
{
    if (state.locations.empty())
        return std::string(unknown_location);
    return nearest_location(state.robot.position, state.locations, state.config.location_match_radius);
}

std::optional<std::string> resting_surface(const WorldState& state, const std::string& object_id)
{
    auto current = object_id;
    for (auto depth = 0; depth < 4; ++depth)
    {
        const auto it = state.objects.find(current);
        if (it == state.objects.end())
            return std::nullopt;
        if (const auto* on = std::get_if<OnSurface>(&it->second.placement))
            return on->location;
        if (const auto* inside = std::get_if<InContainer>(&it->second.placement))
        {
            current = inside->container;
            continue;
        }
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace skillloop
