// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/session.hpp>

#include <optional>
#include <string>
#include <vector>

namespace skillloop
{

/// Headless run of one scenario with a scripted policy.
struct RunOutcome
{
    RunReport report;
    WorldState final_world;
    std::vector<LogEntry> entries;
};

/// Runs `utterance` (the scenario's own when empty) to completion.
RunOutcome run_scripted(const Scenario& scenario,
                        const std::string& policy_text,
                        SessionOptions options,
                        const std::string& utterance = {});

struct ReplayVerdict
{
    bool ok = false;
    /// Index (0-based, header excluded) of the first entry that differs.
    std::optional<std::size_t> divergent_entry;
    std::string expected;
    std::string actual;
    std::string message;
};

/// Re-executes a persisted log from its header and diffs entry by entry.
/// `seed` overrides the recorded seed. Throws std::invalid_argument on a
/// corrupt log.
ReplayVerdict replay_log(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt);
ReplayVerdict replay_lines(const std::vector<std::string>& lines, std::optional<std::uint64_t> seed = std::nullopt);

} // namespace skillloop
