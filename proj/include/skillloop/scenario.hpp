// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/goal.hpp>
#include <skillloop/world.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace skillloop
{

/// Parse or validation failure; the message carries `<source>:<line>:` context.
class ScenarioError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct EstopCommand
{
    bool engaged = true;
};

struct InjectEventCommand
{
    std::string text;
};

/// Queues an utterance for the listen() skill.
struct SayCommand
{
    std::string text;
};

using OperatorAction = std::variant<EstopCommand, InjectEventCommand, SayCommand>;

/// Scripted operator input. Fires at the first control point (before a tool
/// call) where either trigger is met: the session's tool-call index reached
/// `before_call`, or the world tick reached `at_tick`.
struct OperatorCommand
{
    std::optional<std::size_t> before_call;
    std::optional<std::int64_t> at_tick;
    OperatorAction action;
};

struct Scenario
{
    std::string id;
    Platform platform = Platform::indoor;
    std::uint64_t seed = 1;
    std::string today;
    std::string utterance;
    WorldState initial;
    std::vector<GoalPredicate> goal;
    std::vector<OperatorCommand> operator_script;
    /// Prompt sections by key (domain_model, example_state, ...).
    std::map<std::string, std::string> prompt;
    /// Verbatim document the scenario was parsed from.
    std::string source_text;

    /// Initial world for the given seed.
    WorldState make_world(std::uint64_t seed) const;
};

Scenario parse_scenario(const std::string& text, const std::string& source_name = "<scenario>");
Scenario load_scenario(const std::string& path);

std::string read_text_file(const std::string& path);

} // namespace skillloop
