// SPDX-License-Identifier: Apache-2.0
#include <skillloop/session.hpp>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

constexpr auto critic_feedback_prefix = "[goal completion critic] ";

std::string today_or_system_date(const std::string& configured)
{
    if (!configured.empty())
        return configured;
    return fmt::format("{:%Y-%m-%d}", fmt::localtime(std::time(nullptr)));
}

std::size_t gripped_count(const WorldState& world)
{
    return static_cast<std::size_t>(std::ranges::count_if(
        world.objects, [](const auto& entry) { return std::holds_alternative<Gripped>(entry.second.placement); }));
}

std::optional<std::string> entry_id(const WorldState& world)
{
    for (const auto& [id, location]: world.locations)
        if (location.kind == LocationKind::shelter_entry)
            return id;
    return std::nullopt;
}

} // namespace

std::string_view to_string(SessionStatus status)
{
    switch (status)
    {
        case SessionStatus::idle: return "idle";
        case SessionStatus::running: return "running";
        case SessionStatus::awaiting_operator: return "awaiting_operator";
        case SessionStatus::finished: return "finished";
    }
    return "idle";
}

bool RunReport::goal_satisfied() const
{
    return std::ranges::all_of(goal_results, [](const auto& result) { return result.second; });
}

int RunReport::exit_code() const
{
    return goal_satisfied() && invariant_violations.empty() && error.empty() ? 0 : 1;
}

json RunReport::to_json() const
{
    auto goals = json::array();
    for (const auto& [predicate, holds]: goal_results)
        goals.push_back({ { "predicate", predicate }, { "holds", holds } });
    return {
        { "utterance", utterance },
        { "actionable", actionable },
        { "final_text", final_text },
        { "tool_calls", tool_calls },
        { "actions_executed", actions_executed },
        { "action_failures", action_failures },
        { "parameter_errors", parameter_errors },
        { "events_injected", events_injected },
        { "events_consumed", events_consumed },
        { "critic_rounds", critic_rounds },
        { "goal", goals },
        { "goal_satisfied", goal_satisfied() },
        { "invariant_violations", invariant_violations },
        { "error", error },
        { "exit_code", exit_code() },
    };
}

std::string RunReport::to_text() const
{
    auto out = fmt::format("utterance: {}\nbranch: {}\nfinal text: {}\n",
                           utterance,
                           actionable ? "planner_executor" : "chatbot",
                           final_text);
    out += fmt::format("tool calls: {}\nactions executed: {} ({} failed)\nparameter errors: {}\n",
                       tool_calls,
                       actions_executed,
                       action_failures,
                       parameter_errors);
    out += fmt::format("events injected: {}, consumed: {}\ncritic rounds: {}\n", events_injected, events_consumed, critic_rounds);
    for (const auto& [predicate, holds]: goal_results)
        out += fmt::format("goal {}: {}\n", predicate, holds ? "holds" : "NOT satisfied");
    for (const auto& violation: invariant_violations)
        out += fmt::format("invariant violated: {}\n", violation);
    if (!error.empty())
        out += fmt::format("error: {}\n", error);
    return out;
}

Session::Session(std::string id, Scenario scenario, std::unique_ptr<Backend> backend, SessionOptions options)
  : id_(std::move(id)), scenario_(std::move(scenario)), backend_(std::move(backend)), options_(std::move(options))
{
    if (!backend_)
        throw std::invalid_argument("session needs a backend");
    if (options_.max_critic_rounds < 1)
        throw std::invalid_argument("max_critic_rounds must be at least 1");
    world_ = scenario_.make_world(options_.seed);
    published_ = world_;
    script_fired_.assign(scenario_.operator_script.size(), false);
    planner_prompt_ = build_prompt(scenario_.prompt) + "\n## Tools\n"
                      + describe_tools(AgentRole::planner_executor, scenario_.platform, world_.config.catalogue);
    chatbot_system_prompt_ = chatbot_prompt() + "\n\n" + describe_tools(AgentRole::chatbot, scenario_.platform);
}

Session::~Session()
{
    if (worker_.joinable())
        worker_.join();
}

RunReport Session::run(const std::string& utterance)
{
    if (utterance.empty())
        throw std::invalid_argument("utterance must be non-empty");
    {
        const auto lock = std::scoped_lock(mutex_);
        if (running_)
            throw std::logic_error("a run is already active in session " + id_);
        running_ = true;
    }
    return execute(utterance);
}

bool Session::begin_or_redirect(const std::string& utterance)
{
    if (utterance.empty())
        throw std::invalid_argument("utterance must be non-empty");
    {
        const auto lock = std::scoped_lock(mutex_);
        if (!running_)
        {
            running_ = true;
            if (worker_.joinable())
                worker_.join();
            worker_ = std::thread([this, utterance] { execute(utterance); });
            return true;
        }
    }
    inject_event("user: " + utterance);
    return false;
}

void Session::wait()
{
    auto worker = std::thread {};
    {
        const auto lock = std::scoped_lock(mutex_);
        worker = std::move(worker_);
    }
    if (worker.joinable())
        worker.join();
}

RunReport Session::execute(const std::string& utterance)
{
    if (!ran_once_)
    {
        ran_once_ = true;
        if (options_.log_path)
        {
            auto header = json::parse(header_line());
            header["utterance"] = utterance;
            log_.persist_to(*options_.log_path, header.dump());
        }
    }

    const auto first_entry = log_.size();
    auto report = RunReport { .utterance = utterance };
    const auto clock = [this] { return world_.tick; };

    try
    {
        log_.append(EntryKind::utterance, world_.tick, { { "text", utterance } });
        report.actionable = route(utterance, *backend_, log_, world_.tick);
        if (!report.actionable)
        {
            auto context = LoopContext { log_, clock, [this](const ToolCall& call) { return dispatch_chatbot_tool(call); } };
            report.final_text = run_chatbot(utterance, *backend_, context, chatbot_system_prompt_);
        }
        else
        {
            auto context = LoopContext { log_, clock, [this](const ToolCall& call) { return dispatch_planner(call); } };
            const auto options = PlannerOptions {
                .system_prompt = planner_prompt_,
                .tool_schemas = tool_schemas(AgentRole::planner_executor, world_.config.catalogue),
                .budget = options_.budget,
            };
            const auto goal = Goal { utterance, scenario_.goal };
            auto history = std::vector<Message> {};
            for (auto round = 1;; ++round)
            {
                const auto planner = run_planner_executor(utterance, *backend_, context, options, history);
                report.final_text = planner.final_text;
                const auto verdict = run_critic(log_.entries_from(first_entry), goal, *backend_, round, options_.max_critic_rounds);
                log_.append(EntryKind::critic_verdict,
                            world_.tick,
                            { { "round", round }, { "decision", to_string(verdict.decision) }, { "reason", verdict.reason } });
                report.critic_rounds = round;
                if (verdict.decision == CriticDecision::stop)
                    break;
                history.push_back(Message { "user", critic_feedback_prefix + verdict.reason, std::nullopt });
            }
        }
    }
    catch (const std::exception& e)
    {
        report.error = e.what();
        log_.append(EntryKind::final_text, world_.tick, { { "agent", "session" }, { "error", true }, { "text", report.error } });
    }

    finish_report(report, first_entry);
    publish();
    {
        const auto lock = std::scoped_lock(mutex_);
        running_ = false;
        last_report_ = report;
    }
    log_.close();
    return report;
}

void Session::control_point()
{
    const auto lock = std::scoped_lock(mutex_);
    for (auto i = std::size_t { 0 }; i < scenario_.operator_script.size(); ++i)
    {
        if (script_fired_[i])
            continue;
        const auto& command = scenario_.operator_script[i];
        const auto due = (command.before_call && tool_call_index_ >= *command.before_call)
                         || (command.at_tick && world_.tick >= *command.at_tick);
        if (!due)
            continue;
        script_fired_[i] = true;
        apply_operator_locked(command.action);
    }
    for (const auto& action: pending_)
        apply_operator_locked(action);
    pending_.clear();
    published_ = world_;
}

void Session::apply_operator_locked(const OperatorAction& action)
{
    if (const auto* estop = std::get_if<EstopCommand>(&action))
    {
        auto emitted = std::vector<EmittedEvent> {};
        world_ = set_estop(std::move(world_), estop->engaged, emitted);
        for (const auto& event: emitted)
            bus_.inject(event.text, event.tick);
    }
    else if (const auto* inject = std::get_if<InjectEventCommand>(&action))
        bus_.inject(inject->text, world_.tick);
    else if (const auto* say = std::get_if<SayCommand>(&action))
        world_.heard.push_back(say->text);
}

void Session::request_estop(bool engaged)
{
    const auto lock = std::scoped_lock(mutex_);
    if (running_)
    {
        pending_.push_back(EstopCommand { engaged });
        return;
    }
    apply_operator_locked(EstopCommand { engaged });
    published_ = world_;
}

std::uint64_t Session::inject_event(const std::string& text)
{
    auto tick = std::int64_t { 0 };
    {
        const auto lock = std::scoped_lock(mutex_);
        tick = published_.tick;
    }
    return bus_.inject(text, tick);
}

ToolResult Session::dispatch_planner(const ToolCall& call)
{
    control_point();
    ++tool_call_index_;
    auto context = ToolContext {
        .world = world_,
        .bus = bus_,
        .log = log_,
        .on_step = [this](const StepResult& step) { check_step(world_, step); },
    };
    auto result = dispatch(call, context);
    publish();
    return result;
}

ToolResult Session::dispatch_chatbot_tool(const ToolCall& call)
{
    control_point();
    ++tool_call_index_;
    auto context = ChatbotContext { world_, today_or_system_date(scenario_.today), log_ };
    return dispatch_chatbot(call, context);
}

void Session::check_step(const WorldState& before, const StepResult& step)
{
    intervals_.push_back({ step.started_at, step.ended_at });
    const auto& after = step.state;
    const auto& outcome = step.outcome;
    const auto flag = [&](std::string text) { violations_.push_back(fmt::format("t={}: {}", step.started_at, text)); };

    if (gripped_count(after) > 1)
        flag("more than one object gripped");
    if (after.robot.gripped_object
        && !std::holds_alternative<Gripped>(after.objects.at(*after.robot.gripped_object).placement))
        flag("gripped_object does not reference a gripped object");
    if (after.robot.docked && !after.robot.in_shelter)
        flag("docked while outside the shelter");
    if (outcome.ticks_elapsed < 1 || step.ended_at - step.started_at != outcome.ticks_elapsed)
        flag("action interval does not match ticks_elapsed");

    const auto moved = before.robot.position != after.robot.position;
    if (moved && after.config.platform == Platform::indoor && before.robot.arm_posture != ArmPosture::transport)
        flag("robot moved with the arm out of transport posture");
    if (!before.robot.docked && after.robot.docked && robot_location(before) != entry_id(before).value_or(""))
        flag("docked away from the shelter entry");
    if (!outcome.success && moved && before.config.platform == Platform::indoor)
        flag("failed action moved the robot");
}

void Session::publish()
{
    const auto lock = std::scoped_lock(mutex_);
    published_ = world_;
}

void Session::finish_report(RunReport& report, std::size_t first_entry)
{
    auto consumed_seqs = std::map<std::uint64_t, int> {};
    for (const auto& entry: log_.entries_from(first_entry))
    {
        const auto& p = entry.payload;
        if (entry.kind == EntryKind::tool_call)
            ++report.tool_calls;
        else if (entry.kind == EntryKind::tool_result)
        {
            const auto kind = p.value("kind", "");
            if (kind == "parameter_error")
                ++report.parameter_errors;
            else if (p.value("tool", "") == "act")
            {
                ++report.actions_executed;
                if (!p.value("ok", false))
                    ++report.action_failures;
            }
        }
        else if (entry.kind == EntryKind::event)
            ++consumed_seqs[p.value("seq", std::uint64_t { 0 })];
    }

    for (const auto& [seq, count]: consumed_seqs)
        if (count > 1)
            violations_.push_back(fmt::format("event {} delivered {} times", seq, count));

    const auto history = bus_.history();
    report.events_injected = history.size();
    for (const auto& event: history)
    {
        if (!event.consumed_at)
            continue;
        ++report.events_consumed;
        for (const auto& interval: intervals_)
            if (interval.started_at < *event.consumed_at && *event.consumed_at < interval.ended_at)
                violations_.push_back(fmt::format("event {} consumed at t={} inside action interval ({}, {})",
                                                  event.seq,
                                                  *event.consumed_at,
                                                  interval.started_at,
                                                  interval.ended_at));
    }

    for (const auto& predicate: scenario_.goal)
        report.goal_results.emplace_back(predicate.text(), holds(predicate, world_));
    report.invariant_violations = violations_;
}

SessionStatus Session::status() const
{
    const auto lock = std::scoped_lock(mutex_);
    if (running_)
        return published_.robot.estop_engaged ? SessionStatus::awaiting_operator : SessionStatus::running;
    return last_report_ ? SessionStatus::finished : SessionStatus::idle;
}

WorldState Session::world() const
{
    const auto lock = std::scoped_lock(mutex_);
    return published_;
}

Snapshot Session::snapshot() const
{
    return make_snapshot(world());
}

std::optional<RunReport> Session::last_report() const
{
    const auto lock = std::scoped_lock(mutex_);
    return last_report_;
}

std::string Session::header_line() const
{
    return json {
        { "skillloop_log", 1 },
        { "scenario_id", scenario_.id },
        { "scenario", scenario_.source_text },
        { "backend", backend_->describe() },
        { "policy", options_.policy_text },
        { "seed", options_.seed },
        { "budget", options_.budget },
        { "max_critic_rounds", options_.max_critic_rounds },
        { "utterance", "" },
    }.dump();
}

LogHeader parse_log_header(const std::string& line)
{
    const auto doc = json::parse(line, nullptr, false);
    if (!doc.is_object() || !doc.contains("skillloop_log"))
        throw std::invalid_argument("first line is not a log header");
    try
    {
        return LogHeader {
            .scenario_text = doc.at("scenario").get<std::string>(),
            .policy_text = doc.at("policy").get<std::string>(),
            .seed = doc.at("seed").get<std::uint64_t>(),
            .budget = doc.at("budget").get<std::size_t>(),
            .max_critic_rounds = doc.at("max_critic_rounds").get<int>(),
            .utterance = doc.at("utterance").get<std::string>(),
        };
    }
    catch (const json::exception& e)
    {
        throw std::invalid_argument(std::string("malformed log header: ") + e.what());
    }
}

} // namespace skillloop
