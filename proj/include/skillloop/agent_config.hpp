// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace skillloop
{

enum class AgentRole
{
    router,
    chatbot,
    planner_executor,
    critic,
};

enum class ReasoningEffort
{
    minimal,
    low,
};

enum class OutputSchema
{
    boolean,
    string,
};

struct AgentConfig
{
    AgentRole name = AgentRole::router;
    std::string model_id;
    ReasoningEffort reasoning_effort = ReasoningEffort::minimal;
    OutputSchema output_schema = OutputSchema::string;
    std::vector<std::string> tool_names;
};

/// Router, chatbot, planner-executor and critic as deployed on the robots.
const std::array<AgentConfig, 4>& default_agent_profile();
const AgentConfig& default_agent_config(AgentRole role);

std::string_view to_string(AgentRole role);
std::string_view to_string(ReasoningEffort effort);
std::string_view to_string(OutputSchema schema);
AgentRole parse_agent_role(std::string_view text);
ReasoningEffort parse_reasoning_effort(std::string_view text);

} // namespace skillloop
