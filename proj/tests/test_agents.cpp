// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <skillloop/runner.hpp>
#include <skillloop/scripted_backend.hpp>
#include <skillloop/session.hpp>

#include <doctest.h>

using namespace skillloop;
using namespace skillloop::testing;
using json = nlohmann::json;

namespace
{

class ThrowingBackend final: public Backend
{
  public:
    BackendResponse complete(const BackendRequest&) override { throw BackendError("connection refused"); }
    std::string describe() const override { return "throwing"; }
};

bool route_with(BackendResponse response)
{
    auto backend = QueueBackend({ std::move(response) });
    auto log = ExecutionLog {};
    return route("bring me the box", backend, log, 0);
}

/// Builds a run log out of (action, params, ok, text) act results.
struct RunBuilder
{
    ExecutionLog log;

    RunBuilder& act(const std::string& action, std::vector<std::string> params, bool ok, const std::string& text = "")
    {
        log.append(EntryKind::tool_call, 0, { { "tool", "act" }, { "arguments", { { "action", action }, { "params", params } } } });
        log.append(EntryKind::tool_result,
                   0,
                   { { "tool", "act" }, { "kind", "status" }, { "ok", ok }, { "text", text }, { "action", action }, { "params", params } });
        return *this;
    }
    RunBuilder& snapshot(const std::string& text)
    {
        log.append(EntryKind::tool_result, 0, { { "tool", "get_snapshot" }, { "kind", "snapshot" }, { "ok", true }, { "text", text } });
        return *this;
    }
    RunBuilder& final_text(const std::string& text)
    {
        log.append(EntryKind::final_text, 0, { { "agent", "planner_executor" }, { "text", text } });
        return *this;
    }
    std::vector<LogEntry> entries() const { return log.entries(); }
};

Goal goal_of(std::vector<std::string> predicates)
{
    auto goal = Goal { "goal" };
    for (const auto& p: predicates)
        goal.predicates.push_back(parse_goal_predicate(p));
    return goal;
}

RunReport run_policy(const std::string& policy, const std::string& extra_scenario, SessionOptions options = {})
{
    auto scenario = small_indoor_scenario(extra_scenario);
    options.policy_text = policy;
    return run_scripted(scenario, policy, options).report;
}

} // namespace

TEST_CASE("agent profile")
{
    const auto& profile = default_agent_profile();
    CHECK(profile[0].model_id == "gpt-5-mini");
    CHECK(profile[0].reasoning_effort == ReasoningEffort::minimal);
    CHECK(profile[0].output_schema == OutputSchema::boolean);
    CHECK(profile[0].tool_names.empty());
    CHECK(profile[1].model_id == "gpt-5-mini");
    CHECK(profile[1].tool_names == std::vector<std::string> { "get_today_date", "get_available_locations", "get_snapshot", "speak" });
    CHECK(profile[2].model_id == "o3");
    CHECK(profile[2].reasoning_effort == ReasoningEffort::low);
    CHECK(profile[2].tool_names == std::vector<std::string> { "speak", "act", "reflect", "get_snapshot", "check_events" });
    CHECK(profile[3].model_id == "o4-mini");
    CHECK(profile[3].reasoning_effort == ReasoningEffort::low);
    CHECK(profile[3].tool_names.empty());
    CHECK(default_agent_config(AgentRole::critic).name == AgentRole::critic);
}

TEST_CASE("router accepts booleans and falls back to the chatbot")
{
    CHECK(route_with(FinalText { "true" }));
    CHECK(route_with(FinalText { " TRUE\n" }));
    CHECK_FALSE(route_with(FinalText { "false" }));
    CHECK(route_with(FinalText { R"({"actionable": true})" }));
    CHECK_FALSE(route_with(FinalText { "maybe" }));
    CHECK_FALSE(route_with(ToolCall { "act", json::object() }));

    auto backend = QueueBackend({ FinalText { "yes please" } });
    auto log = ExecutionLog {};
    CHECK_FALSE(route("hi", backend, log, 3));
    const auto entry = log.entries().at(0);
    CHECK(entry.kind == EntryKind::routing);
    CHECK(entry.payload["target"] == "chatbot");
    CHECK(entry.payload.contains("error"));
    CHECK(backend.requests.at(0).agent == AgentRole::router);

    auto broken = ThrowingBackend {};
    CHECK_FALSE(route("hi", broken, log, 3));
    CHECK(log.entries().back().payload["error"].get<std::string>().find("connection refused") != std::string::npos);
}

TEST_CASE("chatbot runs never change the world")
{
    auto backend = std::make_unique<QueueBackend>(std::vector<BackendResponse> {
        FinalText { "false" },
        ToolCall { "get_available_locations", json::object() },
        ToolCall { "act", { { "action", "navigate" }, { "params", { "table_1" } } } },
        ToolCall { "speak", { { "text", "I can only talk." } } },
    }, "Locations are home, table_1 and table_2.");
    auto* queue = backend.get();
    const auto scenario = small_indoor_scenario();
    auto session = Session("chat", scenario, std::move(backend), {});
    const auto report = session.run("which tables are there?");
    CHECK_FALSE(report.actionable);
    CHECK(report.final_text == "Locations are home, table_1 and table_2.");
    CHECK(report.parameter_errors == 1);
    CHECK(report.critic_rounds == 0);
    CHECK(describe_state(session.world()) == describe_state(scenario.make_world(1)));
    CHECK(queue->requests.at(1).agent == AgentRole::chatbot);
    CHECK(queue->requests.at(1).tool_schemas.size() == 4);
}

TEST_CASE("planner budget")
{
    auto log = ExecutionLog {};
    auto calls = 0;
    auto context = LoopContext { log, [] { return std::int64_t { 0 }; }, [&](const ToolCall&) {
                                    ++calls;
                                    return ToolResult { .ok = true, .text = "ok", .kind = ResultKind::ack };
                                } };
    auto history = std::vector<Message> {};

    SUBCASE("zero budget makes no calls")
    {
        auto backend = QueueBackend({ ToolCall { "reflect", { { "text", "x" } } } });
        const auto run = run_planner_executor("go", backend, context, { .budget = 0 }, history);
        CHECK(run.budget_exceeded);
        CHECK(run.tool_calls == 0);
        CHECK(calls == 0);
        CHECK(backend.requests.empty());
    }
    SUBCASE("the loop stops after the budget")
    {
        auto backend = QueueBackend(std::vector<BackendResponse>(10, ToolCall { "reflect", { { "text", "x" } } }));
        const auto run = run_planner_executor("go", backend, context, { .budget = 3 }, history);
        CHECK(run.budget_exceeded);
        CHECK(run.tool_calls == 3);
        CHECK(calls == 3);
        CHECK(log.entries().back().payload.value("budget_exceeded", false));
    }
    SUBCASE("history carries goal, calls and results")
    {
        auto backend = QueueBackend({ ToolCall { "reflect", { { "text", "x" } } } }, "finished");
        const auto run = run_planner_executor("go", backend, context, { .budget = 5 }, history);
        CHECK_FALSE(run.budget_exceeded);
        CHECK(run.final_text == "finished");
        REQUIRE(history.size() == 4);
        CHECK(history[0].role == "user");
        CHECK(history[0].content == "go");
        CHECK(history[1].tool_call);
        CHECK(history[2].role == "tool");
        CHECK(history[3].content == "finished");
    }
}

TEST_CASE("rule-based critic")
{
    const auto goal = goal_of({ "on(multimeter_1, table_2)" });

    SUBCASE("talk only continues")
    {
        auto run = RunBuilder {};
        run.act("speak", { "I will do it" }, true).final_text("I would navigate and pick.");
        const auto verdict = assess_log(run.entries(), goal);
        CHECK(verdict.decision == CriticDecision::continue_run);
        CHECK(verdict.reason.find("verbal only") != std::string::npos);
    }
    SUBCASE("three identical failures stop with the cause")
    {
        auto run = RunBuilder {};
        for (auto i = 0; i < 3; ++i)
            run.act("pick", { "screwdriver_1" }, false, "failure: grasp failed");
        const auto verdict = assess_log(run.entries(), goal);
        CHECK(verdict.decision == CriticDecision::stop);
        CHECK(verdict.reason.find("pick(screwdriver_1)") != std::string::npos);
        CHECK(verdict.reason.find("grasp failed") != std::string::npos);
    }
    SUBCASE("three different failures are a genuine attempt")
    {
        auto run = RunBuilder {};
        run.act("pick", { "a" }, false).act("pick", { "b" }, false).act("pick", { "a" }, false);
        const auto verdict = assess_log(run.entries(), goal);
        CHECK(verdict.decision == CriticDecision::stop);
        CHECK(verdict.reason.find("genuine physical attempt") != std::string::npos);
    }
    SUBCASE("a snapshot showing the goal stops")
    {
        auto run = RunBuilder {};
        run.snapshot("at(robot, table_2)\non(multimeter_1, table_2) [age=0]\n");
        CHECK(assess_log(run.entries(), goal).reason.find("goal achieved") != std::string::npos);
    }
    SUBCASE("infeasibility statements stop")
    {
        auto run = RunBuilder {};
        run.final_text("I can't fly to Paris.");
        const auto verdict = assess_log(run.entries(), goal);
        CHECK(verdict.decision == CriticDecision::stop);
        CHECK(verdict.reason.find("infeasible") != std::string::npos);
    }
    SUBCASE("run_critic forces a stop at the round limit")
    {
        auto run = RunBuilder {};
        run.final_text("I would do it.");
        auto backend = QueueBackend({});
        CHECK(run_critic(run.entries(), goal, backend, 1, 3).decision == CriticDecision::continue_run);
        const auto last = run_critic(run.entries(), goal, backend, 3, 3);
        CHECK(last.decision == CriticDecision::stop);
        CHECK(last.reason.find("max critic rounds") != std::string::npos);
    }
}

TEST_CASE("critic output parsing")
{
    CHECK(parse_critic_output("continue: act now").decision == CriticDecision::continue_run);
    CHECK(parse_critic_output("continue: act now").reason == "act now");
    CHECK(parse_critic_output("STOP - done").decision == CriticDecision::stop);
    const auto doc = parse_critic_output(R"({"decision": "continue", "reason": "try"})");
    CHECK(doc.decision == CriticDecision::continue_run);
    CHECK(doc.reason == "try");
    CHECK(parse_critic_output("hmm").decision == CriticDecision::stop);
}

TEST_CASE("prompt assembly")
{
    auto sections = std::map<std::string, std::string> {};
    for (const auto& s: prompt_sections())
        sections[std::string(s.key)] = std::string(s.key) + " body\n";
    const auto prompt = build_prompt(sections);

    auto position = std::size_t { 0 };
    for (const auto& s: prompt_sections())
    {
        const auto at = prompt.find("## " + std::string(s.title) + "\n");
        REQUIRE(at != std::string::npos);
        CHECK(at >= position);
        position = at;
    }

    sections.erase("failure_patterns");
    CHECK(build_prompt(sections).find("failure patterns") == std::string::npos);
    sections["failure_patterns"] = "  \n";
    CHECK(build_prompt(sections).find("Execution failure patterns") == std::string::npos);

    sections.erase("heuristics");
    CHECK_THROWS_AS(build_prompt(sections), PromptConfigError);
    sections["heuristics"] = "h";
    sections["mood"] = "cheerful";
    CHECK_THROWS_AS(build_prompt(sections), PromptConfigError);
}

TEST_CASE("shipped prompts carry the platform invariants")
{
    const auto indoor = build_prompt(load_scenario(scenario_path("indoor_exp1")).prompt);
    CHECK(indoor.find("move_arm(transport) before navigating") != std::string::npos);
    const auto outdoor = build_prompt(load_scenario(scenario_path("outdoor_exp5")).prompt);
    CHECK(outdoor.find("shelter_entry") != std::string::npos);
    CHECK(outdoor.find("dock") != std::string::npos);
}

TEST_CASE("scripted policies")
{
    SUBCASE("default-only roles answer with their default")
    {
        const auto report = run_policy("router: {default: \"false\"}\nchatbot: {default: \"Hello!\"}\n", "goal: []\n");
        CHECK_FALSE(report.actionable);
        CHECK(report.final_text == "Hello!");
        CHECK(report.error.empty());
    }
    SUBCASE("a role without a matching rule or default aborts the run")
    {
        const auto report = run_policy("router: {default: \"true\"}\nplanner_executor:\n  rules:\n"
                                       "    - {phase: nowhere, emit: {final: x}}\n",
                                       "goal: []\n");
        CHECK(report.error.find("no rule matches") != std::string::npos);
        CHECK(report.exit_code() != 0);
    }
    SUBCASE("push and $pop return to the interrupted phase")
    {
        const auto policy = ScriptedPolicy::parse(R"(
router: {default: "true"}
planner_executor:
  rules:
    - {phase: start, emit: {tool: reflect, args: {text: a}}, push: resume, next: side}
    - {phase: side, emit: {tool: reflect, args: {text: b}}, next: $pop}
    - {phase: resume, emit: {final: done}, next: end}
)");
        auto backend = ScriptedBackend(policy);
        auto request = BackendRequest { .agent = AgentRole::planner_executor };
        CHECK(std::holds_alternative<ToolCall>(backend.complete(request)));
        CHECK(backend.phase(AgentRole::planner_executor) == "side");
        backend.complete(request);
        CHECK(backend.phase(AgentRole::planner_executor) == "resume");
        CHECK(std::get<FinalText>(backend.complete(request)).text == "done");
        CHECK_THROWS_AS(backend.complete(request), BackendError);
    }
    SUBCASE("result guards and {{last}}")
    {
        const auto policy = ScriptedPolicy::parse(R"(
chatbot:
  rules:
    - {result: "(?i)^TABLE", emit: {final: "It said {{last}}"}}
  default: nothing
)");
        auto backend = ScriptedBackend(policy);
        auto request = BackendRequest { .agent = AgentRole::chatbot, .history = { { "user", "table_1, table_2", std::nullopt } } };
        CHECK(std::get<FinalText>(backend.complete(request)).text == "It said table_1, table_2");
        request.history[0].content = "home";
        CHECK(std::get<FinalText>(backend.complete(request)).text == "nothing");
        CHECK_FALSE(backend.handles(AgentRole::critic));
        CHECK_THROWS_AS(backend.complete({ .agent = AgentRole::router }), BackendError);
    }
    SUBCASE("parse errors carry a line number")
    {
        try
        {
            ScriptedPolicy::parse("router:\n  rules:\n    - {emit: {shout: x}}\n", "bad.yaml");
            FAIL("expected a parse error");
        }
        catch (const std::runtime_error& e)
        {
            CHECK(std::string(e.what()).find("bad.yaml:3") != std::string::npos);
        }
    }
}

TEST_CASE("critic rounds are bounded by the configured maximum")
{
    const auto talk = read_text_file(policy_path("talk_only"));
    for (const auto max_rounds: { 1, 2, 3, 5 })
    {
        CAPTURE(max_rounds);
        const auto report = run_policy(talk, "goal: [\"on(multimeter_1, table_2)\"]\n", { .max_critic_rounds = max_rounds });
        CHECK(report.critic_rounds == max_rounds);
        CHECK(report.exit_code() == 1);
    }
    CHECK_THROWS_AS(run_policy(talk, "goal: []\n", { .max_critic_rounds = 0 }), std::invalid_argument);
}

TEST_CASE("critic feedback reaches the planner as a user message")
{
    auto backend = std::make_unique<QueueBackend>(std::vector<BackendResponse> { FinalText { "true" } }, "I would do it.");
    auto* queue = backend.get();
    auto session = Session("fb", small_indoor_scenario(), std::move(backend), { .max_critic_rounds = 2 });
    session.run("bring the multimeter");
    const auto& last = queue->requests.back();
    REQUIRE(last.agent == AgentRole::planner_executor);
    const auto feedback = std::ranges::find_if(last.history, [](const Message& m) {
        return m.role == "user" && m.content.starts_with("[goal completion critic]");
    });
    CHECK(feedback != last.history.end());
}
