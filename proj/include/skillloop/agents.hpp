// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/backend.hpp>
#include <skillloop/execution_log.hpp>
#include <skillloop/goal.hpp>
#include <skillloop/tools.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skillloop
{

inline constexpr int default_max_critic_rounds = 3;
inline constexpr std::size_t default_planner_budget = 120;
inline constexpr std::size_t default_chatbot_budget = 16;

/// What an agent loop needs from its session: the log, the simulated clock
/// and a dispatcher for the tools it is allowed to call.
struct LoopContext
{
    ExecutionLog& log;
    std::function<std::int64_t()> clock;
    std::function<ToolResult(const ToolCall&)> dispatch;
};

/// True routes to the planner-executor, false to the chatbot. Malformed
/// backend output falls back to the chatbot and is logged as a routing error.
bool route(std::string_view utterance, Backend& backend, ExecutionLog& log, std::int64_t tick);

std::string run_chatbot(std::string_view utterance,
                        Backend& backend,
                        LoopContext& context,
                        const std::string& system_prompt,
                        std::size_t budget = default_chatbot_budget);

struct PlannerOptions
{
    std::string system_prompt;
    nlohmann::json tool_schemas = nlohmann::json::array();
    std::size_t budget = default_planner_budget;
};

struct PlannerRun
{
    std::string final_text;
    std::size_t tool_calls = 0;
    bool budget_exceeded = false;
};

/// Iterates backend -> dispatch until the backend answers with final text or
/// the tool budget is spent. The loop shape is left to the backend. `history`
/// persists across critic rounds; an empty history is seeded with the goal.
PlannerRun run_planner_executor(std::string_view goal,
                                Backend& backend,
                                LoopContext& context,
                                const PlannerOptions& options,
                                std::vector<Message>& history);

enum class CriticDecision
{
    continue_run,
    stop,
};

std::string_view to_string(CriticDecision decision);

struct CriticVerdict
{
    CriticDecision decision = CriticDecision::stop;
    std::string reason;
};

/// Environment-changing acts exclude speak and listen.
bool is_environment_action(std::string_view action);

/// Rule-based critic over the entries of one run. A genuine physical attempt
/// is at least one environment-changing act that reached the simulator.
CriticVerdict assess_log(const std::vector<LogEntry>& run, const Goal& goal);

/// Decides whether the planner-executor must continue. Always stops once
/// `round >= max_rounds`. Scripted backends without critic rules use assess_log.
CriticVerdict run_critic(const std::vector<LogEntry>& run, const Goal& goal, Backend& backend, int round, int max_rounds);

/// Parses "continue: reason" / "stop: reason" or {"decision":..,"reason":..}.
CriticVerdict parse_critic_output(const std::string& text);

std::string render_log_for_critic(const std::vector<LogEntry>& run);

class PromptConfigError: public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct PromptSection
{
    std::string_view key;
    std::string_view title;
    bool optional;
};

/// Prompt sections in their fixed order.
const std::vector<PromptSection>& prompt_sections();

/// Concatenates the planner-executor prompt sections in fixed order. An empty
/// failure-pattern section is omitted; any other missing section is an error.
std::string build_prompt(const std::map<std::string, std::string>& sections);

std::string router_prompt();
std::string chatbot_prompt();
std::string critic_prompt();

} // namespace skillloop
