// SPDX-License-Identifier: Apache-2.0
#include <skillloop/scenario.hpp>
#include <skillloop/scripted_backend.hpp>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cstdlib>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& source, const YAML::Node& node, const std::string& message)
{
    const auto mark = node.Mark();
    if (mark.is_null())
        throw std::runtime_error(fmt::format("{}: {}", source, message));
    throw std::runtime_error(fmt::format("{}:{}: {}", source, mark.line + 1, message));
}

/// Plain scalars keep their YAML type (bool, integer, float, null); quoted ones stay strings.
json yaml_to_json(const YAML::Node& node)
{
    switch (node.Type())
    {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Sequence:
        {
            auto out = json::array();
            for (const auto& item: node)
                out.push_back(yaml_to_json(item));
            return out;
        }
        case YAML::NodeType::Map:
        {
            auto out = json::object();
            for (const auto& entry: node)
                out[entry.first.as<std::string>()] = yaml_to_json(entry.second);
            return out;
        }
        case YAML::NodeType::Scalar: break;
    }
    const auto& text = node.Scalar();
    if (node.Tag() != "?")
        return text;
    if (text == "true" || text == "false")
        return text == "true";
    if (text == "null" || text == "~")
        return nullptr;
    char* end = nullptr;
    const auto integer = std::strtoll(text.c_str(), &end, 10);
    if (!text.empty() && end == text.c_str() + text.size())
        return integer;
    const auto real = std::strtod(text.c_str(), &end);
    if (!text.empty() && end == text.c_str() + text.size())
        return real;
    return text;
}

std::regex compile(const std::string& source, const YAML::Node& node)
{
    auto pattern = node.as<std::string>();
    auto flags = std::regex::ECMAScript;
    if (pattern.starts_with("(?i)"))
    {
        pattern.erase(0, 4);
        flags |= std::regex::icase;
    }
    try
    {
        return std::regex(pattern, flags);
    }
    catch (const std::regex_error& e)
    {
        fail(source, node, fmt::format("invalid regex '{}': {}", pattern, e.what()));
    }
}

BackendResponse parse_emit(const std::string& source, const YAML::Node& node)
{
    if (!node.IsMap())
        fail(source, node, "emit must be a mapping");
    if (const auto final_text = node["final"])
        return FinalText { final_text.as<std::string>() };
    if (const auto act = node["act"])
    {
        auto params = json::array();
        if (const auto list = node["params"])
            params = yaml_to_json(list);
        return ToolCall { "act", { { "action", yaml_to_json(act) }, { "params", params } } };
    }
    if (const auto tool = node["tool"])
    {
        auto args = node["args"] ? yaml_to_json(node["args"]) : json::object();
        return ToolCall { tool.as<std::string>(), std::move(args) };
    }
    fail(source, node, "emit needs one of 'final', 'act' or 'tool'");
}

RoleScript parse_role(const std::string& source, const YAML::Node& node)
{
    auto script = RoleScript {};
    if (!node.IsMap())
        fail(source, node, "role section must be a mapping with 'rules' and/or 'default'");
    if (const auto fallback = node["default"])
        script.default_text = fallback.as<std::string>();
    if (const auto rules = node["rules"])
    {
        if (!rules.IsSequence())
            fail(source, rules, "rules must be a list");
        for (const auto& item: rules)
        {
            if (!item["emit"])
                fail(source, item, "rule needs 'emit'");
            auto rule = PolicyRule { .emit = parse_emit(source, item["emit"]) };
            if (const auto phase = item["phase"])
                rule.phase = phase.as<std::string>();
            if (const auto result = item["result"])
                rule.result = compile(source, result);
            if (const auto seen = item["seen"])
                rule.seen = compile(source, seen);
            if (const auto next = item["next"])
                rule.next = next.as<std::string>();
            if (const auto push = item["push"])
                rule.push = push.as<std::string>();
            script.rules.push_back(std::move(rule));
        }
    }
    return script;
}

std::string expand_last(std::string text, const std::string& last)
{
    constexpr auto placeholder = std::string_view("{{last}}");
    for (auto at = text.find(placeholder); at != std::string::npos; at = text.find(placeholder, at + last.size()))
        text.replace(at, placeholder.size(), last);
    return text;
}

} // namespace

ScriptedPolicy ScriptedPolicy::parse(const std::string& text, const std::string& source_name)
{
    auto root = YAML::Node {};
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException& e)
    {
        throw std::runtime_error(fmt::format("{}:{}: {}", source_name, e.mark.line + 1, e.msg));
    }
    if (!root.IsMap())
        throw std::runtime_error(fmt::format("{}: policy must be a mapping", source_name));

    auto policy = ScriptedPolicy { .source_text = text };
    try
    {
        policy.name = root["name"] ? root["name"].as<std::string>() : source_name;
        for (auto role: { AgentRole::router, AgentRole::chatbot, AgentRole::planner_executor, AgentRole::critic })
        {
            const auto key = std::string(to_string(role));
            if (const auto section = root[key])
                policy.roles.emplace(role, parse_role(source_name, section));
        }
    }
    catch (const YAML::Exception& e)
    {
        throw std::runtime_error(fmt::format("{}:{}: {}", source_name, e.mark.line + 1, e.msg));
    }
    return policy;
}

ScriptedPolicy ScriptedPolicy::load(const std::string& path)
{
    return parse(read_text_file(path), path);
}

ScriptedBackend::ScriptedBackend(ScriptedPolicy policy): policy_(std::move(policy)) {}

BackendResponse ScriptedBackend::complete(const BackendRequest& request)
{
    const auto script = policy_.roles.find(request.agent);
    if (script == policy_.roles.end())
        throw BackendError(fmt::format("policy '{}' has no section for {}", policy_.name, to_string(request.agent)));

    auto& state = state_[request.agent];
    const auto last = request.history.empty() ? std::string {} : request.history.back().content;

    for (const auto& rule: script->second.rules)
    {
        if (rule.phase && *rule.phase != state.phase)
            continue;
        if (rule.result && !std::regex_search(last, *rule.result))
            continue;
        if (rule.seen && std::none_of(request.history.begin(), request.history.end(), [&](const Message& m) {
                return std::regex_search(m.content, *rule.seen);
            }))
            continue;

        if (rule.push)
            state.stack.push_back(*rule.push);
        if (rule.next)
        {
            if (*rule.next == "$pop")
            {
                if (state.stack.empty())
                    throw BackendError(fmt::format("policy '{}': $pop with an empty phase stack", policy_.name));
                state.phase = state.stack.back();
                state.stack.pop_back();
            }
            else
                state.phase = *rule.next;
        }
        if (const auto* final_text = std::get_if<FinalText>(&rule.emit))
            return FinalText { expand_last(final_text->text, last) };
        return rule.emit;
    }

    if (script->second.default_text)
        return FinalText { *script->second.default_text };
    throw BackendError(fmt::format("policy '{}': no rule matches for {} in phase '{}' and no default",
                                   policy_.name,
                                   to_string(request.agent),
                                   state.phase));
}

bool ScriptedBackend::handles(AgentRole role) const
{
    return policy_.roles.contains(role);
}

std::string ScriptedBackend::describe() const
{
    return "scripted:" + policy_.name;
}

std::string ScriptedBackend::phase(AgentRole role) const
{
    const auto it = state_.find(role);
    return it == state_.end() ? "start" : it->second.phase;
}

} // namespace skillloop
