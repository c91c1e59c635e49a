// SPDX-License-Identifier: Apache-2.0
#include <skillloop/runner.hpp>
#include <skillloop/scripted_backend.hpp>

#include <fmt/format.h>

#include <fstream>

namespace skillloop
{

RunOutcome run_scripted(const Scenario& scenario,
                        const std::string& policy_text,
                        SessionOptions options,
                        const std::string& utterance)
{
    const auto text = utterance.empty() ? scenario.utterance : utterance;
    if (text.empty())
        throw std::invalid_argument(fmt::format("scenario '{}' has no utterance and none was given", scenario.id));
    options.policy_text = policy_text;
    auto session = Session("cli",
                           scenario,
                           std::make_unique<ScriptedBackend>(ScriptedPolicy::parse(policy_text, "<policy>")),
                           std::move(options));
    auto report = session.run(text);
    return RunOutcome { std::move(report), session.world(), session.log().entries() };
}

ReplayVerdict replay_lines(const std::vector<std::string>& lines, std::optional<std::uint64_t> seed)
{
    if (lines.empty())
        throw std::invalid_argument("log is empty");
    const auto header = parse_log_header(lines.front());
    for (auto i = std::size_t { 1 }; i < lines.size(); ++i)
    {
        try
        {
            LogEntry::from_line(lines[i]);
        }
        catch (const std::invalid_argument& e)
        {
            throw std::invalid_argument(fmt::format("line {}: {}", i + 1, e.what()));
        }
    }
    if (header.policy_text.empty())
        return { .ok = false, .message = "log was not produced by a scripted policy; nothing to replay against" };

    const auto scenario = parse_scenario(header.scenario_text, "<logged scenario>");
    const auto outcome = run_scripted(scenario,
                                      header.policy_text,
                                      SessionOptions {
                                          .seed = seed.value_or(header.seed),
                                          .max_critic_rounds = header.max_critic_rounds,
                                          .budget = header.budget,
                                      },
                                      header.utterance);

    const auto recorded = lines.size() - 1;
    const auto count = std::max(recorded, outcome.entries.size());
    for (auto i = std::size_t { 0 }; i < count; ++i)
    {
        const auto expected = i < recorded ? lines[i + 1] : std::string("<end of log>");
        const auto actual = i < outcome.entries.size() ? outcome.entries[i].to_line() : std::string("<end of log>");
        if (expected != actual)
            return {
                .ok = false,
                .divergent_entry = i,
                .expected = expected,
                .actual = actual,
                .message = fmt::format("mismatch at entry {}", i),
            };
    }
    return { .ok = true, .message = fmt::format("ok: {} entries reproduced", recorded) };
}

ReplayVerdict replay_log(const std::string& path, std::optional<std::uint64_t> seed)
{
    auto in = std::ifstream(path);
    if (!in)
        throw std::invalid_argument("cannot open log " + path);
    auto lines = std::vector<std::string> {};
    for (auto line = std::string {}; std::getline(in, line);)
        if (!line.empty())
            lines.push_back(line);
    return replay_lines(lines, seed);
}

} // namespace skillloop
