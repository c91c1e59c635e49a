// SPDX-License-Identifier: Apache-2.0
#include <skillloop/agent_config.hpp>

#include <stdexcept>

namespace skillloop
{

const std::array<AgentConfig, 4>& default_agent_profile()
{
    static const auto profile = std::array<AgentConfig, 4> {
        AgentConfig { AgentRole::router, "gpt-5-mini", ReasoningEffort::minimal, OutputSchema::boolean, {} },
        AgentConfig { AgentRole::chatbot,
                      "gpt-5-mini",
                      ReasoningEffort::minimal,
                      OutputSchema::string,
                      { "get_today_date", "get_available_locations", "get_snapshot", "speak" } },
        AgentConfig { AgentRole::planner_executor,
                      "o3",
                      ReasoningEffort::low,
                      OutputSchema::string,
                      { "speak", "act", "reflect", "get_snapshot", "check_events" } },
        AgentConfig { AgentRole::critic, "o4-mini", ReasoningEffort::low, OutputSchema::string, {} },
    };
    return profile;
}

const AgentConfig& default_agent_config(AgentRole role)
{
    return default_agent_profile().at(static_cast<std::size_t>(role));
}

std::string_view to_string(AgentRole role)
{
    switch (role)
    {
        case AgentRole::router: return "router";
        case AgentRole::chatbot: return "chatbot";
        case AgentRole::planner_executor: return "planner_executor";
        case AgentRole::critic: return "critic";
    }
    return "router";
}

std::string_view to_string(ReasoningEffort effort)
{
    return effort == ReasoningEffort::minimal ? "minimal" : "low";
}

std::string_view to_string(OutputSchema schema)
{
    return schema == OutputSchema::boolean ? "bool" : "string";
}

AgentRole parse_agent_role(std::string_view text)
{
    for (auto role: { AgentRole::router, AgentRole::chatbot, AgentRole::planner_executor, AgentRole::critic })
        if (to_string(role) == text)
            return role;
    throw std::invalid_argument("unknown agent '" + std::string(text) + "'");
}

ReasoningEffort parse_reasoning_effort(std::string_view text)
{
    if (text == "minimal")
        return ReasoningEffort::minimal;
    if (text == "low")
        return ReasoningEffort::low;
    throw std::invalid_argument("unknown reasoning effort '" + std::string(text) + "'");
}

} // namespace skillloop
