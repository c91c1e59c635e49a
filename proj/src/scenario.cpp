// SPDX-License-Identifier: Apache-2.0
#include <skillloop/scenario.hpp>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace skillloop
{

namespace
{

class Parser
{
  public:
    explicit Parser(std::string source): source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const
    {
        const auto mark = node.Mark();
        if (mark.is_null())
            throw ScenarioError(fmt::format("{}: {}", source_, message));
        throw ScenarioError(fmt::format("{}:{}: {}", source_, mark.line + 1, message));
    }

    YAML::Node require(const YAML::Node& parent, const char* key) const
    {
        auto node = parent[key];
        if (!node)
            fail(parent, fmt::format("missing required field '{}'", key));
        return node;
    }

    template <typename T>
    T as(const YAML::Node& node, const char* what) const
    {
        try
        {
            return node.as<T>();
        }
        catch (const YAML::Exception&)
        {
            fail(node, fmt::format("invalid value for '{}'", what));
        }
    }

    template <typename T>
    T get_or(const YAML::Node& parent, const char* key, T fallback) const
    {
        const auto node = parent[key];
        return node ? as<T>(node, key) : fallback;
    }

    template <typename Fn>
    auto enum_value(const YAML::Node& node, const char* what, Fn parse) const
    {
        try
        {
            return parse(as<std::string>(node, what));
        }
        catch (const std::invalid_argument& e)
        {
            fail(node, e.what());
        }
    }

    Scenario parse(const std::string& text)
    {
        auto root = YAML::Node {};
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException& e)
        {
            throw ScenarioError(fmt::format("{}:{}: {}", source_, e.mark.line + 1, e.msg));
        }
        if (!root.IsMap())
            throw ScenarioError(fmt::format("{}: scenario must be a mapping", source_));

        auto scenario = Scenario {};
        scenario.source_text = text;
        scenario.id = as<std::string>(require(root, "id"), "id");
        scenario.platform = enum_value(require(root, "platform"), "platform", parse_platform);
        scenario.seed = get_or<std::uint64_t>(root, "seed", 1);
        scenario.today = get_or<std::string>(root, "today", "");
        scenario.utterance = get_or<std::string>(root, "utterance", "");

        auto& world = scenario.initial;
        world.config.platform = scenario.platform;
        world.config.catalogue = default_catalogue(scenario.platform);

        parse_locations(require(root, "locations"), world);
        if (const auto config = root["config"])
            parse_config(config, world.config);
        parse_objects(root["objects"], world);
        parse_robot(root["robot"], world);

        if (const auto goal = root["goal"])
        {
            if (!goal.IsSequence())
                fail(goal, "goal must be a list of predicates");
            for (const auto& item: goal)
                scenario.goal.push_back(parse_goal(item, world));
        }
        if (const auto script = root["operator_script"])
            parse_operator_script(script, scenario.operator_script);
        if (const auto prompt = root["prompt"])
        {
            if (!prompt.IsMap())
                fail(prompt, "prompt must map section names to text");
            for (const auto& entry: prompt)
                scenario.prompt[as<std::string>(entry.first, "prompt section")] = as<std::string>(entry.second, "prompt section");
        }
        return scenario;
    }

  private:
    void parse_locations(const YAML::Node& node, WorldState& world) const
    {
        if (!node.IsSequence() || node.size() == 0)
            fail(node, "locations must be a non-empty list");
        auto entries = 0;
        auto shelters = 0;
        for (const auto& item: node)
        {
            auto location = Location {
                .id = as<std::string>(require(item, "id"), "id"),
                .kind = enum_value(require(item, "kind"), "kind", parse_location_kind),
                .position = { as<double>(require(item, "x"), "x"), as<double>(require(item, "y"), "y") },
            };
            if (location.id.empty() || location.id == "unknown" || location.id == "robot")
                fail(item, fmt::format("invalid location id '{}'", location.id));
            if (world.locations.contains(location.id))
                fail(item, fmt::format("duplicate location id '{}'", location.id));
            entries += location.kind == LocationKind::shelter_entry ? 1 : 0;
            shelters += location.kind == LocationKind::shelter ? 1 : 0;
            world.locations.emplace(location.id, location);
        }
        if (shelters > 1)
            fail(node, "at most one shelter is supported");
        if (shelters == 1 && entries != 1)
            fail(node, fmt::format("a world with a shelter needs exactly one shelter_entry (found {})", entries));
    }

    void parse_config(const YAML::Node& node, WorldConfig& config) const
    {
        if (!node.IsMap())
            fail(node, "config must be a mapping");
        if (const auto catalogue = node["catalogue"])
        {
            config.catalogue.clear();
            for (const auto& item: catalogue)
            {
                const auto name = as<std::string>(item, "catalogue");
                const auto* sig = find_signature(name);
                if (sig == nullptr)
                    fail(item, fmt::format("unknown action '{}' in catalogue", name));
                if (!sig->platforms.contains(config.platform))
                    fail(item, fmt::format("action '{}' is not available on the {} platform", name, to_string(config.platform)));
                config.catalogue.insert(name);
            }
        }
        config.battery_drain_per_meter = get_or(node, "battery_drain_per_meter", config.battery_drain_per_meter);
        if (const auto thresholds = node["battery_thresholds"])
        {
            config.battery_thresholds.low = get_or(thresholds, "low", config.battery_thresholds.low);
            config.battery_thresholds.critical = get_or(thresholds, "critical", config.battery_thresholds.critical);
        }
        config.location_match_radius = get_or(node, "location_match_radius", config.location_match_radius);
        config.freshness_window = get_or(node, "freshness_window", config.freshness_window);
        config.speed = get_or(node, "speed", config.speed);
        config.charge_rate = get_or(node, "charge_rate", config.charge_rate);
        config.strict_placement = get_or(node, "strict_placement", config.strict_placement);
        if (const auto capacity = node["surface_capacity"])
            for (const auto& entry: capacity)
                config.surface_capacity[as<std::string>(entry.first, "surface_capacity")] = as<int>(entry.second, "surface_capacity");
        if (const auto rates = node["failure_rates"])
            for (const auto& entry: rates)
                config.failure_rates[as<std::string>(entry.first, "failure_rates")] = as<double>(entry.second, "failure_rates");
        try
        {
            config.validate();
        }
        catch (const std::invalid_argument& e)
        {
            fail(node, e.what());
        }
    }

    void parse_objects(const YAML::Node& node, WorldState& world) const
    {
        if (!node)
            return;
        if (!node.IsSequence())
            fail(node, "objects must be a list");
        auto marks = std::map<std::string, YAML::Node> {};
        for (const auto& item: node)
        {
            auto object = ObjectItem {
                .id = as<std::string>(require(item, "id"), "id"),
                .object_class = item["class"] ? enum_value(item["class"], "class", parse_object_class) : ObjectClass::other,
                .grasp_difficulty = item["grasp"] ? enum_value(item["grasp"], "grasp", parse_grasp_difficulty)
                                                  : GraspDifficulty::easy,
            };
            if (object.id.empty() || object.id == "robot")
                fail(item, fmt::format("invalid object id '{}'", object.id));
            if (world.objects.contains(object.id) || world.locations.contains(object.id))
                fail(item, fmt::format("duplicate object id '{}'", object.id));
            if (const auto aliases = item["aliases"])
                for (const auto& alias: aliases)
                    object.aliases.insert(as<std::string>(alias, "aliases"));

            const auto on = item["on"];
            const auto in = item["in"];
            if (static_cast<bool>(on) == static_cast<bool>(in))
                fail(item, fmt::format("object '{}' needs exactly one of 'on' or 'in'", object.id));
            if (on)
                object.placement = OnSurface { as<std::string>(on, "on") };
            else
                object.placement = InContainer { as<std::string>(in, "in") };
            marks.emplace(object.id, item);
            world.objects.emplace(object.id, std::move(object));
        }

        for (const auto& [id, object]: world.objects)
        {
            const auto& item = marks.at(id);
            if (const auto* on = std::get_if<OnSurface>(&object.placement))
            {
                if (!world.locations.contains(on->location))
                    fail(item, fmt::format("object '{}' references unknown location '{}'", id, on->location));
            }
            else if (const auto* inside = std::get_if<InContainer>(&object.placement))
            {
                const auto container = world.objects.find(inside->container);
                if (container == world.objects.end())
                    fail(item, fmt::format("object '{}' references unknown container '{}'", id, inside->container));
                if (container->second.object_class != ObjectClass::container)
                    fail(item, fmt::format("'{}' is not a container", inside->container));
                if (object.object_class == ObjectClass::container)
                    fail(item, fmt::format("container '{}' cannot be inside another container", id));
                if (!std::holds_alternative<OnSurface>(container->second.placement))
                    fail(item, fmt::format("container '{}' must stand on a location", inside->container));
            }
        }
    }

    void parse_robot(const YAML::Node& node, WorldState& world) const
    {
        auto& robot = world.robot;
        if (!node)
        {
            robot.position = world.locations.begin()->second.position;
            return;
        }
        if (const auto at = node["at"])
        {
            const auto id = as<std::string>(at, "at");
            const auto location = world.locations.find(id);
            if (location == world.locations.end())
                fail(at, fmt::format("robot references unknown location '{}'", id));
            robot.position = location->second.position;
        }
        else
        {
            robot.position = { as<double>(require(node, "x"), "x"), as<double>(require(node, "y"), "y") };
        }
        if (const auto posture = node["arm_posture"])
            robot.arm_posture = enum_value(posture, "arm_posture", parse_arm_posture);
        robot.battery_percent = get_or(node, "battery", robot.battery_percent);
        if (robot.battery_percent < 0.0 || robot.battery_percent > 100.0)
            fail(node, "battery must lie in [0, 100]");
        robot.docked = get_or(node, "docked", false);
        robot.estop_engaged = get_or(node, "estop", false);
        if (robot.docked)
        {
            const auto here = nearest_shelter(world);
            if (!here)
                fail(node, "a docked robot must start at the shelter");
            robot.in_shelter = true;
        }
        if (const auto gripped = node["gripped"])
        {
            const auto id = as<std::string>(gripped, "gripped");
            const auto object = world.objects.find(id);
            if (object == world.objects.end())
                fail(gripped, fmt::format("robot grips unknown object '{}'", id));
            object->second.placement = Gripped {};
            robot.gripped_object = id;
        }
    }

    static std::optional<std::string> nearest_shelter(const WorldState& world)
    {
        for (const auto& [id, location]: world.locations)
            if (location.kind == LocationKind::shelter && distance(location.position, world.robot.position) <= 1e-9)
                return id;
        return std::nullopt;
    }

    GoalPredicate parse_goal(const YAML::Node& node, const WorldState& world) const
    {
        auto predicate = GoalPredicate {};
        try
        {
            predicate = parse_goal_predicate(as<std::string>(node, "goal"));
        }
        catch (const std::invalid_argument& e)
        {
            fail(node, e.what());
        }
        const auto& args = predicate.args;
        const auto known_object = [&](const std::string& id) { return world.objects.contains(id); };
        const auto known_location = [&](const std::string& id) { return world.locations.contains(id); };
        if ((predicate.name == "on" && !(known_object(args[0]) && known_location(args[1])))
            || (predicate.name == "in" && !(known_object(args[0]) && known_object(args[1])))
            || (predicate.name == "gripped" && !known_object(args[0]))
            || ((predicate.name == "at" || predicate.name == "scanned") && !known_location(args.back())))
            fail(node, fmt::format("goal '{}' references unknown ids", predicate.text()));
        return predicate;
    }

    void parse_operator_script(const YAML::Node& node, std::vector<OperatorCommand>& out) const
    {
        if (!node.IsSequence())
            fail(node, "operator_script must be a list");
        for (const auto& item: node)
        {
            auto command = OperatorCommand {};
            if (const auto call = item["before_call"])
                command.before_call = as<std::size_t>(call, "before_call");
            if (const auto tick = item["at_tick"])
                command.at_tick = as<std::int64_t>(tick, "at_tick");
            if (!command.before_call && !command.at_tick)
                fail(item, "operator command needs 'before_call' or 'at_tick'");

            const auto estop = item["estop"];
            const auto event = item["event"];
            const auto say = item["say"];
            if (static_cast<int>(static_cast<bool>(estop)) + static_cast<bool>(event) + static_cast<bool>(say) != 1)
                fail(item, "operator command needs exactly one of 'estop', 'event', 'say'");
            if (estop)
                command.action = EstopCommand { as<bool>(estop, "estop") };
            else if (event)
                command.action = InjectEventCommand { as<std::string>(event, "event") };
            else
                command.action = SayCommand { as<std::string>(say, "say") };
            if (const auto* inject = std::get_if<InjectEventCommand>(&command.action); inject && inject->text.empty())
                fail(item, "event text must be non-empty");
            out.push_back(std::move(command));
        }
    }

    std::string source_;
};

} // namespace

WorldState Scenario::make_world(std::uint64_t seed) const
{
    auto world = initial;
    world.rng_seed = seed;
    return world;
}

Scenario parse_scenario(const std::string& text, const std::string& source_name)
{
    return Parser(source_name).parse(text);
}

std::string read_text_file(const std::string& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    auto buffer = std::ostringstream {};
    buffer << in.rdbuf();
    return buffer.str();
}

Scenario load_scenario(const std::string& path)
{
    auto text = std::string {};
    try
    {
        text = read_text_file(path);
    }
    catch (const std::runtime_error& e)
    {
        throw ScenarioError(e.what());
    }
    return parse_scenario(text, path);
}

} // namespace skillloop
