// SPDX-License-Identifier: Apache-2.0
#include <skillloop/facts.hpp>
#include <skillloop/tools.hpp>

#include <fmt/format.h>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

ToolResult parameter_error(std::string text)
{
    return ToolResult { .ok = false, .text = "parameter error: " + std::move(text), .kind = ResultKind::parameter_error };
}

void require_no_arguments(const ToolCall& call)
{
    const auto& args = call.arguments;
    if (args.is_null() || (args.is_object() && args.empty()))
        return;
    throw ParameterError(fmt::format("{} takes no arguments", call.tool));
}

std::string require_text_argument(const ToolCall& call)
{
    const auto& args = call.arguments;
    if (!args.is_object() || args.size() != 1 || !args.contains("text") || !args["text"].is_string())
        throw ParameterError(fmt::format("{} expects exactly {{\"text\": string}}", call.tool));
    auto text = args["text"].get<std::string>();
    if (text.empty())
        throw ParameterError(fmt::format("{} text must be non-empty", call.tool));
    return text;
}

ToolResult run_act(const ToolCall& call, ToolContext& context)
{
    const auto request = parse_act_payload(call.arguments);
    auto step = apply_action(context.world, request.action, request.params);

    for (const auto& event: step.events)
        context.bus.inject(event.text, event.tick);
    if (context.on_step)
        context.on_step(step);

    context.world = std::move(step.state);
    return ToolResult {
        .ok = step.outcome.success,
        .text = step.outcome.status_text,
        .kind = ResultKind::status,
        .details = {
            { "action", request.action },
            { "params", request.params },
            { "started_at", step.started_at },
            { "ended_at", step.ended_at },
        },
    };
}

ToolResult run_check_events(ToolContext& context)
{
    const auto tick = context.world.tick;
    const auto events = context.bus.drain(tick);
    for (const auto& event: events)
    {
        context.log.append(EntryKind::event,
                           tick,
                           {
                               { "seq", event.seq },
                               { "text", event.text },
                               { "injected_at", event.injected_at },
                               { "consumed_at", *event.consumed_at },
                           });
    }
    return ToolResult { .ok = true, .text = EventBus::render(events), .kind = ResultKind::events };
}

std::string planner_tool_doc(const std::set<std::string>& catalogue)
{
    auto out = std::string {};
    out += "- speak: not a separate tool; use act with action \"speak\" and params [text]\n";
    out += "- act(action, params): execute exactly one high level action; params is a list of strings "
           "interpreted positionally according to action; no additional fields\n";
    for (const auto& sig: action_signatures())
    {
        if (!catalogue.contains(std::string(sig.name)))
            continue;
        out += fmt::format("  - {}: {}\n", render_signature(sig), sig.doc);
    }
    out += "- reflect(text): record a plan or reasoning step; does not change the environment\n";
    out += "- get_snapshot(): return the current sensor-driven semantic state as predicates; "
           "on/in facts carry their age in ticks\n";
    out += "- check_events(): return discrete text events raised since the last check, or \"no events\"\n";
    return out;
}

std::string chatbot_tool_doc()
{
    return "- get_today_date(): today's date\n"
           "- get_available_locations(): known location ids\n"
           "- get_snapshot(): current semantic state snapshot (read only)\n"
           "- speak(text): say text to the user\n";
}

json function_schema(std::string_view name, std::string_view description, json parameters)
{
    return {
        { "type", "function" },
        { "function",
          {
              { "name", name },
              { "description", description },
              { "strict", true },
              { "parameters", std::move(parameters) },
          } },
    };
}

json empty_parameters()
{
    return { { "type", "object" }, { "properties", json::object() }, { "additionalProperties", false } };
}

json text_parameters()
{
    return {
        { "type", "object" },
        { "properties", { { "text", { { "type", "string" } } } } },
        { "required", { "text" } },
        { "additionalProperties", false },
    };
}

} // namespace

std::string_view to_string(ResultKind kind)
{
    switch (kind)
    {
        case ResultKind::ack: return "ack";
        case ResultKind::status: return "status";
        case ResultKind::snapshot: return "snapshot";
        case ResultKind::events: return "events";
        case ResultKind::parameter_error: return "parameter_error";
    }
    return "status";
}

ActRequest parse_act_payload(const json& arguments)
{
    constexpr auto expected = "act expects exactly {\"action\": string, \"params\": [string, ...]}";
    if (!arguments.is_object())
        throw ParameterError(expected);
    for (const auto& [key, _]: arguments.items())
        if (key != "action" && key != "params")
            throw ParameterError(fmt::format("unexpected field '{}'; {}", key, expected));
    if (!arguments.contains("action") || !arguments["action"].is_string())
        throw ParameterError(fmt::format("missing or non-string 'action'; {}", expected));
    if (!arguments.contains("params") || !arguments["params"].is_array())
        throw ParameterError(fmt::format("missing or non-array 'params'; {}", expected));

    auto request = ActRequest { .action = arguments["action"].get<std::string>() };
    for (const auto& param: arguments["params"])
    {
        if (!param.is_string())
            throw ParameterError(fmt::format("params must all be strings (got {}); {}", param.dump(), expected));
        request.params.push_back(param.get<std::string>());
    }
    return request;
}

ToolResult dispatch(const ToolCall& call, ToolContext& context)
{
    try
    {
        if (call.tool == "reflect")
        {
            auto text = require_text_argument(call);
            context.log.append(EntryKind::reflection, context.world.tick, { { "text", text } });
            return ToolResult { .ok = true, .text = "reflection recorded", .kind = ResultKind::ack };
        }
        if (call.tool == "act")
            return run_act(call, context);
        if (call.tool == "get_snapshot")
        {
            require_no_arguments(call);
            return ToolResult { .ok = true, .text = make_snapshot(context.world).rendered_text, .kind = ResultKind::snapshot };
        }
        if (call.tool == "check_events")
        {
            require_no_arguments(call);
            return run_check_events(context);
        }
        if (call.tool == "speak")
            return parameter_error("speak is an act mode: call act with {\"action\": \"speak\", \"params\": [text]}");
        return parameter_error(fmt::format("unknown tool '{}'; available tools: reflect, act, get_snapshot, check_events\n{}",
                                           call.tool,
                                           planner_tool_doc(context.world.config.catalogue)));
    }
    catch (const ParameterError& e)
    {
        return parameter_error(e.what());
    }
}

ToolResult dispatch_chatbot(const ToolCall& call, ChatbotContext& context)
{
    try
    {
        if (call.tool == "get_today_date")
        {
            require_no_arguments(call);
            return ToolResult { .ok = true, .text = context.today, .kind = ResultKind::status };
        }
        if (call.tool == "get_available_locations")
        {
            require_no_arguments(call);
            auto ids = std::vector<std::string> {};
            for (const auto& [id, _]: context.world.locations)
                ids.push_back(id);
            return ToolResult { .ok = true, .text = fmt::format("{}", fmt::join(ids, ", ")), .kind = ResultKind::status };
        }
        if (call.tool == "get_snapshot")
        {
            require_no_arguments(call);
            return ToolResult { .ok = true, .text = make_snapshot(context.world).rendered_text, .kind = ResultKind::snapshot };
        }
        if (call.tool == "speak")
        {
            auto text = require_text_argument(call);
            return ToolResult { .ok = true, .text = "completed speech", .kind = ResultKind::status, .details = { { "spoken", text } } };
        }
        if (call.tool == "act")
            return parameter_error("the chatbot cannot act; actionable requests are handled by the planner-executor");
        return parameter_error(fmt::format("unknown tool '{}'; available tools: get_today_date, "
                                           "get_available_locations, get_snapshot, speak",
                                           call.tool));
    }
    catch (const ParameterError& e)
    {
        return parameter_error(e.what());
    }
}

std::string describe_tools(AgentRole role, Platform platform, const std::set<std::string>& catalogue)
{
    const auto& config = default_agent_config(role);
    auto out = fmt::format("agent: {}\nplatform: {}\nmodel: {}\nreasoning effort: {}\noutput schema: {}\n",
                           to_string(role),
                           to_string(platform),
                           config.model_id,
                           to_string(config.reasoning_effort),
                           to_string(config.output_schema));
    if (config.tool_names.empty())
        return out + "tools: none\n";
    out += fmt::format("tools: {}\n", fmt::join(config.tool_names, ", "));
    if (role == AgentRole::planner_executor)
        out += planner_tool_doc(catalogue);
    else
        out += chatbot_tool_doc();
    return out;
}

std::string describe_tools(AgentRole role, Platform platform)
{
    return describe_tools(role, platform, default_catalogue(platform));
}

std::string describe_tools(std::string_view role, std::string_view platform)
{
    return describe_tools(parse_agent_role(role), parse_platform(platform));
}

json tool_schemas(AgentRole role, const std::set<std::string>& catalogue)
{
    auto tools = json::array();
    if (role == AgentRole::planner_executor)
    {
        auto actions = json::array();
        for (const auto& name: catalogue)
            actions.push_back(name);
        tools.push_back(function_schema("act",
                                        "Execute exactly one high level action. params are strings interpreted "
                                        "positionally according to action.\n" + planner_tool_doc(catalogue),
                                        {
                                            { "type", "object" },
                                            { "properties",
                                              {
                                                  { "action", { { "type", "string" }, { "enum", actions } } },
                                                  { "params", { { "type", "array" }, { "items", { { "type", "string" } } } } },
                                              } },
                                            { "required", { "action", "params" } },
                                            { "additionalProperties", false },
                                        }));
        tools.push_back(function_schema("reflect", "Record a plan or reasoning step without changing the environment.", text_parameters()));
        tools.push_back(function_schema("get_snapshot", "Return the partially observable semantic state snapshot.", empty_parameters()));
        tools.push_back(function_schema("check_events", "Return text events raised since the last check.", empty_parameters()));
    }
    else if (role == AgentRole::chatbot)
    {
        tools.push_back(function_schema("get_today_date", "Return today's date.", empty_parameters()));
        tools.push_back(function_schema("get_available_locations", "Return the known location ids.", empty_parameters()));
        tools.push_back(function_schema("get_snapshot", "Return the semantic state snapshot.", empty_parameters()));
        tools.push_back(function_schema("speak", "Say text to the user.", text_parameters()));
    }
    return tools;
}

} // namespace skillloop
