// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/session.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace httplib
{
class Server;
}

namespace skillloop
{

/// Session lookup failure; maps to HTTP 404.
class UnknownSession: public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

struct ServiceOptions
{
    /// Policy used for sessions whose scenario upload carries none.
    std::string default_policy_text;
    /// When set, sessions use this remote backend instead of a scripted policy.
    std::optional<std::string> remote_spec;
    /// Each session persists its log to <log_dir>/<session id>.log.
    std::optional<std::string> log_dir;
    int max_critic_rounds = default_max_critic_rounds;
    std::size_t budget = default_planner_budget;
};

/// In-memory session registry plus the HTTP control plane.
///
///   POST /scenario                  body: scenario YAML, or JSON {scenario, policy?, seed?}
///   GET  /sessions                  session handles
///   GET  /sessions/{id}             one handle
///   POST /sessions/{id}/utterance   {"text": ...}
///   POST /sessions/{id}/events      {"text": ...}
///   POST /sessions/{id}/estop       {"engaged": bool}
///   GET  /sessions/{id}/state       ground truth (operator only)
///   GET  /sessions/{id}/snapshot    agent view
///   GET  /sessions/{id}/log         NDJSON stream: backlog, then live tail
///                                   (?follow=false returns the backlog only)
class Service
{
  public:
    explicit Service(ServiceOptions options);
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;
    ~Service();

    nlohmann::json load_scenario(const std::string& scenario_text,
                                 std::optional<std::string> policy_text = std::nullopt,
                                 std::optional<std::uint64_t> seed = std::nullopt);
    nlohmann::json submit_utterance(const std::string& session_id, const std::string& text);
    nlohmann::json inject_event(const std::string& session_id, const std::string& text);
    nlohmann::json set_estop(const std::string& session_id, bool engaged);
    nlohmann::json handle(const std::string& session_id) const;
    nlohmann::json state(const std::string& session_id) const;
    nlohmann::json snapshot(const std::string& session_id) const;
    nlohmann::json list() const;

    std::shared_ptr<Session> session(const std::string& session_id) const;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    void serve(const std::string& host, int port);
    void stop();

  private:
    void install_routes();

    ServiceOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::atomic<bool> stopping_ = false;

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t next_id_ = 1;
};

} // namespace skillloop
