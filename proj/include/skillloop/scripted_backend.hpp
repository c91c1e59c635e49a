// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/backend.hpp>

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace skillloop
{

/// Deterministic stand-in for a language model.
///
/// Each agent role has an ordered rule list; the first rule whose guards all
/// match fires. Guards:
///   phase   - the role's current phase equals this name ("start" initially)
///   result  - regex searched in the content of the last history message
///   seen    - regex searched in any history message
/// A firing rule emits a tool call or final text, optionally pushes a return
/// phase (`push`) and moves to `next`; `next: $pop` returns to the most
/// recently pushed phase. With no matching rule the role's default final text
/// is emitted; without a default the policy is in error. In final text,
/// `{{last}}` expands to the content of the last history message.
struct PolicyRule
{
    std::optional<std::string> phase;
    std::optional<std::regex> result;
    std::optional<std::regex> seen;
    BackendResponse emit;
    std::optional<std::string> next;
    std::optional<std::string> push;
};

struct RoleScript
{
    std::vector<PolicyRule> rules;
    std::optional<std::string> default_text;
};

struct ScriptedPolicy
{
    std::string name;
    std::map<AgentRole, RoleScript> roles;
    std::string source_text;

    /// Throws std::runtime_error with `<source>:<line>:` context.
    static ScriptedPolicy parse(const std::string& text, const std::string& source_name = "<policy>");
    static ScriptedPolicy load(const std::string& path);
};

class ScriptedBackend final: public Backend
{
  public:
    explicit ScriptedBackend(ScriptedPolicy policy);

    BackendResponse complete(const BackendRequest& request) override;
    bool handles(AgentRole role) const override;
    std::string describe() const override;

    const ScriptedPolicy& policy() const { return policy_; }
    std::string phase(AgentRole role) const;

  private:
    struct RoleState
    {
        std::string phase = "start";
        std::vector<std::string> stack;
    };

    ScriptedPolicy policy_;
    std::map<AgentRole, RoleState> state_;
};

} // namespace skillloop
