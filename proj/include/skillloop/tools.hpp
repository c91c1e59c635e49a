// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/agent_config.hpp>
#include <skillloop/event_bus.hpp>
#include <skillloop/execution_log.hpp>
#include <skillloop/world.hpp>

#include <nlohmann/json.hpp>

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace skillloop
{

enum class ResultKind
{
    ack,
    status,
    snapshot,
    events,
    parameter_error,
};

std::string_view to_string(ResultKind kind);

/// A tool invocation as emitted by a backend: tool name plus raw JSON arguments.
struct ToolCall
{
    std::string tool;
    nlohmann::json arguments = nlohmann::json::object();

    bool operator==(const ToolCall&) const = default;
};

struct ToolResult
{
    bool ok = false;
    std::string text;
    ResultKind kind = ResultKind::status;
    /// act only: action, params, started_at, ended_at.
    nlohmann::json details = nlohmann::json::object();
};

struct ActRequest
{
    std::string action;
    std::vector<std::string> params;
};

/// Strict act schema: an object with exactly "action" (string) and "params"
/// (array of strings). Throws ParameterError otherwise.
ActRequest parse_act_payload(const nlohmann::json& arguments);

struct ToolContext
{
    WorldState& world;
    EventBus& bus;
    ExecutionLog& log;
    /// Called after every apply_action with the full step record.
    std::function<void(const StepResult&)> on_step = {};
};

/// Planner-executor tools: reflect, act, get_snapshot, check_events.
ToolResult dispatch(const ToolCall& call, ToolContext& context);

struct ChatbotContext
{
    const WorldState& world;
    std::string today;
    ExecutionLog& log;
};

/// Chatbot tools: get_today_date, get_available_locations, get_snapshot, speak.
/// Never touches the world; speech goes to the log only.
ToolResult dispatch_chatbot(const ToolCall& call, ChatbotContext& context);

/// Human-readable tool documentation per agent, including skill docstrings
/// for the planner-executor.
std::string describe_tools(AgentRole role, Platform platform, const std::set<std::string>& catalogue);
std::string describe_tools(AgentRole role, Platform platform);
/// Throws std::invalid_argument for unknown agent or platform names.
std::string describe_tools(std::string_view role, std::string_view platform);

/// Function-calling schemas (chat-completion "tools" array) per agent.
nlohmann::json tool_schemas(AgentRole role, const std::set<std::string>& catalogue);

} // namespace skillloop
