// SPDX-License-Identifier: Apache-2.0
// Headless runner, replay verifier and service launcher.
#include <skillloop/remote_backend.hpp>
#include <skillloop/runner.hpp>
#include <skillloop/service.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <iostream>

namespace
{

using namespace skillloop;

Service* active_service = nullptr;

void on_signal(int)
{
    if (active_service != nullptr)
        active_service->stop();
}

void serve_until_signal(Service& service, const std::string& host, int port)
{
    active_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    fmt::print(stderr, "serving on http://{}:{}\n", host, port);
    service.serve(host, port);
    active_service = nullptr;
}

struct RunArgs
{
    std::string scenario;
    std::string policy;
    std::optional<std::uint64_t> seed;
    std::string backend = "scripted";
    std::string remote;
    int max_critic_rounds = default_max_critic_rounds;
    std::size_t budget = default_planner_budget;
    std::string report;
    std::string log;
    std::string utterance;
    bool serve = false;
    std::string host = "127.0.0.1";
    int port = 8765;
};

int run_command(const RunArgs& args)
{
    const auto scenario = load_scenario(args.scenario);
    const auto policy_text = args.policy.empty() ? std::string {} : read_text_file(args.policy);

    if (args.serve)
    {
        auto service = Service(ServiceOptions {
            .default_policy_text = policy_text,
            .remote_spec = args.backend == "remote" ? std::optional(args.remote) : std::nullopt,
            .max_critic_rounds = args.max_critic_rounds,
            .budget = args.budget,
        });
        const auto handle = service.load_scenario(scenario.source_text, std::nullopt, args.seed);
        fmt::print(stderr, "session {} loaded ({})\n", handle["session"].get<std::string>(), scenario.id);
        serve_until_signal(service, args.host, args.port);
        return 0;
    }

    auto options = SessionOptions {
        .seed = args.seed.value_or(scenario.seed),
        .max_critic_rounds = args.max_critic_rounds,
        .budget = args.budget,
    };
    if (!args.log.empty())
        options.log_path = args.log;

    auto report = RunReport {};
    if (args.backend == "remote")
    {
        if (args.remote.empty())
            throw CLI::ValidationError("--remote", "required with --backend remote");
        const auto utterance = args.utterance.empty() ? scenario.utterance : args.utterance;
        auto session = Session("cli", scenario, std::make_unique<RemoteBackend>(parse_remote_spec(args.remote)), options);
        report = session.run(utterance);
    }
    else
    {
        if (policy_text.empty())
            throw CLI::ValidationError("--policy", "required with --backend scripted");
        report = run_scripted(scenario, policy_text, options, args.utterance).report;
    }

    fmt::print("{}", report.to_text());
    if (!args.report.empty())
    {
        auto out = std::ofstream(args.report);
        if (!out)
            throw std::runtime_error("cannot write report " + args.report);
        out << report.to_json().dump(2) << '\n';
    }
    return report.exit_code();
}

} // namespace

int main(int argc, char** argv)
{
    auto app = CLI::App { "skillloop: planner-executor control loop over simulated robots" };
    app.require_subcommand(1);

    auto run_args = RunArgs {};
    auto* run = app.add_subcommand("run", "run a scenario to completion and report");
    run->add_option("--scenario", run_args.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--policy", run_args.policy, "scripted policy file")->check(CLI::ExistingFile);
    run->add_option("--seed", run_args.seed, "failure-injection seed (default: the scenario's)");
    run->add_option("--backend", run_args.backend, "scripted or remote")->check(CLI::IsMember({ "scripted", "remote" }));
    run->add_option("--remote", run_args.remote, "remote backend as <url>,<model>,<effort>");
    run->add_option("--max-critic-rounds", run_args.max_critic_rounds)->check(CLI::PositiveNumber);
    run->add_option("--budget", run_args.budget, "tool calls per planner-executor invocation");
    run->add_option("--report", run_args.report, "write the JSON report here");
    run->add_option("--log", run_args.log, "persist the execution log here");
    run->add_option("--utterance", run_args.utterance, "override the scenario utterance");
    run->add_flag("--serve", run_args.serve, "load the scenario into the service instead of running it");
    run->add_option("--host", run_args.host);
    run->add_option("--port", run_args.port);

    auto replay_path = std::string {};
    auto replay_seed = std::optional<std::uint64_t> {};
    auto* replay = app.add_subcommand("replay", "re-execute a persisted log and diff it");
    replay->add_option("--log", replay_path)->required()->check(CLI::ExistingFile);
    replay->add_option("--seed", replay_seed, "re-execute with this seed instead of the recorded one");

    auto serve_args = RunArgs {};
    auto log_dir = std::string {};
    auto* serve = app.add_subcommand("serve", "start the HTTP control plane");
    serve->add_option("--policy", serve_args.policy, "default scripted policy")->check(CLI::ExistingFile);
    serve->add_option("--remote", serve_args.remote, "use a remote backend <url>,<model>,<effort>");
    serve->add_option("--log-dir", log_dir, "persist one log file per session");
    serve->add_option("--max-critic-rounds", serve_args.max_critic_rounds)->check(CLI::PositiveNumber);
    serve->add_option("--budget", serve_args.budget);
    serve->add_option("--host", serve_args.host);
    serve->add_option("--port", serve_args.port);

    auto tools_agent = std::string { "planner_executor" };
    auto tools_platform = std::string { "indoor" };
    auto* tools = app.add_subcommand("tools", "print an agent's tool documentation");
    tools->add_option("--agent", tools_agent);
    tools->add_option("--platform", tools_platform);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run->parsed())
            return run_command(run_args);
        if (replay->parsed())
        {
            const auto verdict = replay_log(replay_path, replay_seed);
            fmt::print("{}\n", verdict.message);
            if (verdict.divergent_entry)
                fmt::print("expected: {}\nactual:   {}\n", verdict.expected, verdict.actual);
            return verdict.ok ? 0 : 1;
        }
        if (serve->parsed())
        {
            auto service = Service(ServiceOptions {
                .default_policy_text = serve_args.policy.empty() ? std::string {} : read_text_file(serve_args.policy),
                .remote_spec = serve_args.remote.empty() ? std::nullopt : std::optional(serve_args.remote),
                .log_dir = log_dir.empty() ? std::nullopt : std::optional(log_dir),
                .max_critic_rounds = serve_args.max_critic_rounds,
                .budget = serve_args.budget,
            });
            serve_until_signal(service, serve_args.host, serve_args.port);
            return 0;
        }
        if (tools->parsed())
        {
            fmt::print("{}", describe_tools(tools_agent, tools_platform));
            return 0;
        }
    }
    catch (const CLI::Error& e)
    {
        return app.exit(e);
    }
    catch (const std::exception& e)
    {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
