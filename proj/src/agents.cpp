// SPDX-License-Identifier: Apache-2.0
#include <skillloop/agents.hpp>
#include <skillloop/facts.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

std::string lowercase_trimmed(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    auto out = std::string(text);
    std::ranges::transform(out, out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<bool> parse_routing(const BackendResponse& response)
{
    const auto* final_text = std::get_if<FinalText>(&response);
    if (final_text == nullptr)
        return std::nullopt;
    const auto text = lowercase_trimmed(final_text->text);
    if (text == "true")
        return true;
    if (text == "false")
        return false;
    const auto doc = json::parse(final_text->text, nullptr, false);
    if (doc.is_boolean())
        return doc.get<bool>();
    if (doc.is_object() && doc.size() == 1 && doc.contains("actionable") && doc["actionable"].is_boolean())
        return doc["actionable"].get<bool>();
    return std::nullopt;
}

std::string describe_response(const BackendResponse& response)
{
    if (const auto* call = std::get_if<ToolCall>(&response))
        return fmt::format("tool call {}({})", call->tool, call->arguments.dump());
    return std::get<FinalText>(response).text;
}

json result_payload(AgentRole agent, const ToolCall& call, const ToolResult& result)
{
    auto payload = json {
        { "agent", to_string(agent) },
        { "tool", call.tool },
        { "ok", result.ok },
        { "kind", to_string(result.kind) },
        { "text", result.text },
    };
    for (const auto& [key, value]: result.details.items())
        payload[key] = value;
    return payload;
}

struct ActRecord
{
    std::string action;
    json params;
    bool ok;
    std::string text;
};

std::vector<ActRecord> environment_acts(const std::vector<LogEntry>& run)
{
    auto out = std::vector<ActRecord> {};
    for (const auto& entry: run)
    {
        if (entry.kind != EntryKind::tool_result)
            continue;
        const auto& p = entry.payload;
        if (p.value("tool", "") != "act" || p.value("kind", "") != "status")
            continue;
        const auto action = p.value("action", "");
        if (!is_environment_action(action))
            continue;
        out.push_back({ action, p.value("params", json::array()), p.value("ok", false), p.value("text", "") });
    }
    return out;
}

std::optional<std::string> last_snapshot_text(const std::vector<LogEntry>& run)
{
    for (auto it = run.rbegin(); it != run.rend(); ++it)
        if (it->kind == EntryKind::tool_result && it->payload.value("kind", "") == "snapshot")
            return it->payload.value("text", "");
    return std::nullopt;
}

bool snapshot_shows(const std::string& snapshot, const std::string& fact)
{
    auto start = std::size_t { 0 };
    while (start < snapshot.size())
    {
        auto end = snapshot.find('\n', start);
        if (end == std::string::npos)
            end = snapshot.size();
        const auto line = std::string_view(snapshot).substr(start, end - start);
        if (line == fact || line.starts_with(fact + " "))
            return true;
        start = end + 1;
    }
    return false;
}

bool observable(const GoalPredicate& predicate)
{
    static const auto names = std::vector<std::string> { "at", "on", "in", "arm_posture", "battery", "docked" };
    return !predicate.negated && std::ranges::find(names, predicate.name) != names.end();
}

std::optional<std::string> last_final_text(const std::vector<LogEntry>& run)
{
    for (auto it = run.rbegin(); it != run.rend(); ++it)
        if (it->kind == EntryKind::final_text)
            return it->payload.value("text", "");
    return std::nullopt;
}

} // namespace

bool route(std::string_view utterance, Backend& backend, ExecutionLog& log, std::int64_t tick)
{
    auto request = BackendRequest {
        .agent = AgentRole::router,
        .system_prompt = router_prompt(),
        .history = { Message { "user", std::string(utterance), std::nullopt } },
    };
    auto payload = json { { "agent", "router" } };
    auto actionable = false;
    try
    {
        const auto response = backend.complete(request);
        payload["raw"] = describe_response(response);
        if (const auto decision = parse_routing(response))
            actionable = *decision;
        else
            payload["error"] = "router output is not a boolean; falling back to chatbot";
    }
    catch (const BackendError& e)
    {
        payload["error"] = fmt::format("router backend failed ({}); falling back to chatbot", e.what());
    }
    payload["actionable"] = actionable;
    payload["target"] = actionable ? "planner_executor" : "chatbot";
    log.append(EntryKind::routing, tick, std::move(payload));
    return actionable;
}

std::string run_chatbot(std::string_view utterance,
                        Backend& backend,
                        LoopContext& context,
                        const std::string& system_prompt,
                        std::size_t budget)
{
    auto request = BackendRequest {
        .agent = AgentRole::chatbot,
        .system_prompt = system_prompt,
        .history = { Message { "user", std::string(utterance), std::nullopt } },
        .tool_schemas = tool_schemas(AgentRole::chatbot, {}),
    };
    auto text = std::string {};
    for (auto calls = std::size_t { 0 };; ++calls)
    {
        if (calls == budget)
        {
            text = "budget exceeded";
            break;
        }
        const auto response = backend.complete(request);
        if (const auto* final_text = std::get_if<FinalText>(&response))
        {
            text = final_text->text;
            break;
        }
        const auto& call = std::get<ToolCall>(response);
        context.log.append(EntryKind::tool_call,
                           context.clock(),
                           { { "agent", "chatbot" }, { "tool", call.tool }, { "arguments", call.arguments } });
        const auto result = context.dispatch(call);
        context.log.append(EntryKind::tool_result, context.clock(), result_payload(AgentRole::chatbot, call, result));
        request.history.push_back(Message { "assistant", "", call });
        request.history.push_back(Message { "tool", result.text, std::nullopt });
    }
    context.log.append(EntryKind::final_text, context.clock(), { { "agent", "chatbot" }, { "text", text } });
    return text;
}

PlannerRun run_planner_executor(std::string_view goal,
                                Backend& backend,
                                LoopContext& context,
                                const PlannerOptions& options,
                                std::vector<Message>& history)
{
    if (history.empty())
        history.push_back(Message { "user", std::string(goal), std::nullopt });

    auto run = PlannerRun {};
    while (true)
    {
        if (run.tool_calls >= options.budget)
        {
            run.final_text = "budget exceeded";
            run.budget_exceeded = true;
            break;
        }
        const auto response = backend.complete(BackendRequest {
            .agent = AgentRole::planner_executor,
            .system_prompt = options.system_prompt,
            .history = history,
            .tool_schemas = options.tool_schemas,
        });
        if (const auto* final_text = std::get_if<FinalText>(&response))
        {
            run.final_text = final_text->text;
            break;
        }

        const auto& call = std::get<ToolCall>(response);
        ++run.tool_calls;
        context.log.append(EntryKind::tool_call,
                           context.clock(),
                           { { "agent", "planner_executor" }, { "tool", call.tool }, { "arguments", call.arguments } });
        const auto result = context.dispatch(call);
        context.log.append(EntryKind::tool_result, context.clock(), result_payload(AgentRole::planner_executor, call, result));
        history.push_back(Message { "assistant", "", call });
        history.push_back(Message { "tool", result.text, std::nullopt });
    }

    auto payload = json { { "agent", "planner_executor" }, { "text", run.final_text }, { "tool_calls", run.tool_calls } };
    if (run.budget_exceeded)
        payload["budget_exceeded"] = true;
    context.log.append(EntryKind::final_text, context.clock(), std::move(payload));
    history.push_back(Message { "assistant", run.final_text, std::nullopt });
    return run;
}

std::string_view to_string(CriticDecision decision)
{
    return decision == CriticDecision::continue_run ? "continue" : "stop";
}

bool is_environment_action(std::string_view action)
{
    return !action.empty() && action != "speak" && action != "listen";
}

CriticVerdict assess_log(const std::vector<LogEntry>& run, const Goal& goal)
{
    const auto acts = environment_acts(run);

    if (acts.size() >= 3)
    {
        const auto& last = acts.back();
        const auto tail = std::span(acts).last(3);
        const auto repeated = std::ranges::all_of(tail, [&](const ActRecord& act) {
            return !act.ok && act.action == last.action && act.params == last.params;
        });
        if (repeated)
        {
            auto params = std::vector<std::string> {};
            for (const auto& p: last.params)
                params.push_back(p.is_string() ? p.get<std::string>() : p.dump());
            return { CriticDecision::stop,
                     fmt::format("blocked after 3 consecutive failures of {}({}); cause: {}",
                                 last.action,
                                 fmt::join(params, ", "),
                                 last.text) };
        }
    }

    if (!goal.predicates.empty() && std::ranges::all_of(goal.predicates, observable))
    {
        if (const auto snapshot = last_snapshot_text(run))
        {
            const auto satisfied = std::ranges::all_of(goal.predicates, [&](const GoalPredicate& p) {
                return snapshot_shows(*snapshot, p.fact());
            });
            if (satisfied)
                return { CriticDecision::stop, "goal achieved: the latest snapshot shows every goal predicate" };
        }
    }

    if (const auto final_text = last_final_text(run))
    {
        static const auto infeasible = std::regex(R"(\b(can't|cannot|can not|infeasible|impossible|unable)\b)",
                                                  std::regex::ECMAScript | std::regex::icase);
        if (std::regex_search(*final_text, infeasible))
            return { CriticDecision::stop, "the planner reported the goal as infeasible: " + *final_text };
    }

    if (acts.empty())
        return { CriticDecision::continue_run,
                 "verbal only: no environment-changing action was attempted although the goal looks feasible; "
                 "execute the plan step by step with act" };

    const auto failed = std::ranges::count_if(acts, [](const ActRecord& act) { return !act.ok; });
    return { CriticDecision::stop,
             fmt::format("genuine physical attempt made ({} environment action(s), {} failed)", acts.size(), failed) };
}

CriticVerdict parse_critic_output(const std::string& text)
{
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_object() && doc.contains("decision") && doc["decision"].is_string())
    {
        const auto decision = lowercase_trimmed(doc["decision"].get<std::string>());
        const auto reason = doc.value("reason", std::string {});
        if (decision == "continue")
            return { CriticDecision::continue_run, reason };
        if (decision == "stop")
            return { CriticDecision::stop, reason };
    }

    const auto lowered = lowercase_trimmed(text);
    const auto reason_after = [&](std::size_t prefix) {
        auto rest = std::string_view(text);
        while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
            rest.remove_prefix(1);
        rest.remove_prefix(std::min(prefix, rest.size()));
        while (!rest.empty() && (rest.front() == ':' || std::isspace(static_cast<unsigned char>(rest.front()))))
            rest.remove_prefix(1);
        return std::string(rest);
    };
    if (lowered.starts_with("continue"))
        return { CriticDecision::continue_run, reason_after(8) };
    if (lowered.starts_with("stop"))
        return { CriticDecision::stop, reason_after(4) };
    return { CriticDecision::stop, "unparseable critic output, stopping: " + text };
}

std::string render_log_for_critic(const std::vector<LogEntry>& run)
{
    auto out = std::string {};
    for (const auto& entry: run)
    {
        const auto& p = entry.payload;
        auto line = std::string {};
        switch (entry.kind)
        {
            case EntryKind::tool_call:
                line = fmt::format("call {} {}", p.value("tool", ""), p.value("arguments", json::object()).dump());
                break;
            case EntryKind::tool_result:
            case EntryKind::reflection:
            case EntryKind::event:
            case EntryKind::final_text:
            case EntryKind::utterance: line = p.value("text", ""); break;
            case EntryKind::routing: line = p.value("target", ""); break;
            case EntryKind::critic_verdict:
                line = fmt::format("{}: {}", p.value("decision", ""), p.value("reason", ""));
                break;
        }
        out += fmt::format("[t={}] {}: {}\n", entry.tick, to_string(entry.kind), line);
    }
    return out;
}

CriticVerdict run_critic(const std::vector<LogEntry>& run, const Goal& goal, Backend& backend, int round, int max_rounds)
{
    auto verdict = CriticVerdict {};
    if (!backend.handles(AgentRole::critic))
        verdict = assess_log(run, goal);
    else
    {
        const auto request = BackendRequest {
            .agent = AgentRole::critic,
            .system_prompt = critic_prompt(),
            .history = { Message { "user",
                                   fmt::format("goal: {}\n\nexecution log:\n{}", goal.text, render_log_for_critic(run)),
                                   std::nullopt } },
        };
        try
        {
            const auto response = backend.complete(request);
            if (const auto* text = std::get_if<FinalText>(&response))
                verdict = parse_critic_output(text->text);
            else
                verdict = { CriticDecision::stop, "critic attempted a tool call; stopping" };
        }
        catch (const BackendError& e)
        {
            verdict = { CriticDecision::stop, std::string("critic backend failed: ") + e.what() };
        }
    }

    if (round >= max_rounds && verdict.decision == CriticDecision::continue_run)
        verdict = { CriticDecision::stop, fmt::format("max critic rounds ({}) reached; last assessment: {}", max_rounds, verdict.reason) };
    if (verdict.reason.empty())
        verdict.reason = verdict.decision == CriticDecision::stop ? "run accepted" : "continue the task";
    return verdict;
}

const std::vector<PromptSection>& prompt_sections()
{
    static const auto sections = std::vector<PromptSection> {
        { "domain_model", "Domain model", false },
        { "example_state", "Example semantic environment state", false },
        { "operational_instructions", "Operational instructions", false },
        { "affordances", "Object and action affordances", false },
        { "heuristics", "Domain specific heuristics", false },
        { "action_catalogue", "Action catalogue", false },
        { "exemplars", "Planning and acting exemplars", false },
        { "failure_patterns", "Execution failure patterns to avoid", true },
    };
    return sections;
}

std::string build_prompt(const std::map<std::string, std::string>& sections)
{
    for (const auto& [key, _]: sections)
    {
        const auto known = std::ranges::any_of(prompt_sections(), [&](const PromptSection& s) { return s.key == key; });
        if (!known)
            throw PromptConfigError(fmt::format("unknown prompt section '{}'", key));
    }

    auto out = std::string {};
    for (const auto& section: prompt_sections())
    {
        const auto it = sections.find(std::string(section.key));
        const auto present = it != sections.end() && it->second.find_first_not_of(" \t\r\n") != std::string::npos;
        if (!present)
        {
            if (section.optional)
                continue;
            throw PromptConfigError(fmt::format("prompt section '{}' is missing", section.key));
        }
        auto body = it->second;
        while (!body.empty() && (body.back() == '\n' || body.back() == ' '))
            body.pop_back();
        if (!out.empty())
            out += "\n\n";
        out += fmt::format("## {}\n{}", section.title, body);
    }
    return out + "\n";
}

std::string router_prompt()
{
    return "Classify the user utterance. Answer true if it is an instruction that requires the robot to act "
           "(including requests the robot may have to refuse), false if it is conversational (a question or small "
           "talk). Answer with a single boolean.";
}

std::string chatbot_prompt()
{
    return "You are the conversational front end of a robot. Answer questions and small talk briefly. You may "
           "read the date, the known locations and the semantic state snapshot, and you may speak. You cannot "
           "make the robot act; politely refuse requests that need physical action or that the robot cannot do.";
}

std::string critic_prompt()
{
    return "You are the goal completion critic. Read the user goal and the execution log (reflections, state "
           "snapshots, actions, events, tool results). A genuine physical attempt is at least one "
           "environment-changing act (anything except speak and listen) that reached the robot. Answer "
           "\"continue: <instruction>\" if the planner only talked through a feasible task without a genuine "
           "attempt. Answer \"stop: <reason>\" if the goal is achieved, if the goal is infeasible, if progress is "
           "blocked by repeated physical failures (report the failure and its cause) or if further action needs "
           "explicit user consent.";
}

} // namespace skillloop
