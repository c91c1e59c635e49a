// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/agents.hpp>
#include <skillloop/backend.hpp>
#include <skillloop/event_bus.hpp>
#include <skillloop/execution_log.hpp>
#include <skillloop/facts.hpp>
#include <skillloop/scenario.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace skillloop
{

enum class SessionStatus
{
    idle,
    running,
    awaiting_operator,
    finished,
};

std::string_view to_string(SessionStatus status);

struct SessionOptions
{
    std::uint64_t seed = 1;
    int max_critic_rounds = default_max_critic_rounds;
    std::size_t budget = default_planner_budget;
    /// Append-only log file; the first line is a replay header.
    std::optional<std::string> log_path;
    /// Recorded in the header so replay can rebuild the backend.
    std::string policy_text;
};

struct ActionInterval
{
    std::int64_t started_at = 0;
    std::int64_t ended_at = 0;
};

struct RunReport
{
    std::string utterance;
    bool actionable = false;
    std::string final_text;
    std::size_t tool_calls = 0;
    std::size_t actions_executed = 0;
    std::size_t action_failures = 0;
    std::size_t parameter_errors = 0;
    std::size_t events_injected = 0;
    std::size_t events_consumed = 0;
    int critic_rounds = 0;
    std::vector<std::pair<std::string, bool>> goal_results;
    std::vector<std::string> invariant_violations;
    /// Backend or policy failure that aborted the run.
    std::string error;

    bool goal_satisfied() const;
    /// 0 iff every goal predicate holds, no invariant tripped and nothing aborted the run.
    int exit_code() const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// One robot, one world, one log. The control loop runs on whichever thread
/// calls run(); operator input from other threads is queued and applied at
/// the next control point (before a tool call), so the world is only ever
/// mutated by the control thread.
class Session
{
  public:
    Session(std::string id, Scenario scenario, std::unique_ptr<Backend> backend, SessionOptions options);
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;
    ~Session();

    const std::string& id() const { return id_; }
    const Scenario& scenario() const { return scenario_; }
    const SessionOptions& options() const { return options_; }

    /// Routes the utterance and runs the chosen branch to completion.
    RunReport run(const std::string& utterance);

    /// Thread-safe operator input. Applied immediately while idle, otherwise
    /// at the next control point.
    void request_estop(bool engaged);
    /// Injects a text event on the bus. Throws std::invalid_argument on empty text.
    std::uint64_t inject_event(const std::string& text);

    /// Starts a run on a worker thread when none is active and returns true;
    /// otherwise injects "user: <text>" and returns false. Throws
    /// std::invalid_argument on empty text.
    bool begin_or_redirect(const std::string& utterance);

    /// Blocks until a run started by begin_or_redirect has finished.
    void wait();

    SessionStatus status() const;
    WorldState world() const;
    Snapshot snapshot() const;
    std::optional<RunReport> last_report() const;

    ExecutionLog& log() { return log_; }
    const ExecutionLog& log() const { return log_; }
    EventBus& bus() { return bus_; }

    /// JSON header line written at the top of a persisted log.
    std::string header_line() const;

  private:
    RunReport execute(const std::string& utterance);
    void control_point();
    void apply_operator_locked(const OperatorAction& action);
    ToolResult dispatch_planner(const ToolCall& call);
    ToolResult dispatch_chatbot_tool(const ToolCall& call);
    void check_step(const WorldState& before, const StepResult& step);
    void publish();
    void finish_report(RunReport& report, std::size_t first_entry);

    std::string id_;
    Scenario scenario_;
    std::unique_ptr<Backend> backend_;
    SessionOptions options_;
    std::string planner_prompt_;
    std::string chatbot_system_prompt_;

    WorldState world_;
    EventBus bus_;
    ExecutionLog log_;

    mutable std::mutex mutex_;
    WorldState published_;
    std::vector<OperatorAction> pending_;
    std::vector<bool> script_fired_;
    std::size_t tool_call_index_ = 0;
    bool running_ = false;
    bool ran_once_ = false;
    std::optional<RunReport> last_report_;
    std::thread worker_;

    std::vector<ActionInterval> intervals_;
    std::vector<std::string> violations_;
};

/// Parsed first line of a persisted log.
struct LogHeader
{
    std::string scenario_text;
    std::string policy_text;
    std::uint64_t seed = 1;
    std::size_t budget = default_planner_budget;
    int max_critic_rounds = default_max_critic_rounds;
    std::string utterance;
};

/// Throws std::invalid_argument when the line is not a log header.
LogHeader parse_log_header(const std::string& line);

} // namespace skillloop
