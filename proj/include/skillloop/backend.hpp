// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/agent_config.hpp>
#include <skillloop/tools.hpp>

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace skillloop
{

struct Message
{
    /// system, user, assistant or tool
    std::string role;
    std::string content;
    std::optional<ToolCall> tool_call;
};

struct BackendRequest
{
    AgentRole agent = AgentRole::planner_executor;
    std::string system_prompt;
    std::vector<Message> history;
    nlohmann::json tool_schemas = nlohmann::json::array();
};

struct FinalText
{
    std::string text;
    bool operator==(const FinalText&) const = default;
};

using BackendResponse = std::variant<ToolCall, FinalText>;

class BackendError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Language model behind one or more agents. Calls are synchronous.
class Backend
{
  public:
    virtual ~Backend() = default;

    virtual BackendResponse complete(const BackendRequest& request) = 0;

    /// Whether this backend supplies its own decisions for `role`. The critic
    /// falls back to rule-based assessment when a scripted backend has none.
    virtual bool handles(AgentRole /*role*/) const { return true; }

    virtual std::string describe() const = 0;
};

/// Parses `scripted:<policy file>` or `remote:<url>,<model>,<effort>`.
std::unique_ptr<Backend> make_backend(const std::string& spec);

} // namespace skillloop
