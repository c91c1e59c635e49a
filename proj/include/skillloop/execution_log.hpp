// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skillloop
{

enum class EntryKind
{
    utterance,
    routing,
    reflection,
    tool_call,
    tool_result,
    event,
    final_text,
    critic_verdict,
};

std::string_view to_string(EntryKind kind);
EntryKind parse_entry_kind(std::string_view text);

struct LogEntry
{
    std::size_t seq = 0;
    EntryKind kind = EntryKind::utterance;
    std::int64_t tick = 0;
    nlohmann::json payload = nlohmann::json::object();

    /// One JSON object per line: {"kind":..,"payload":..,"seq":..,"tick":..}
    std::string to_line() const;
    static LogEntry from_line(std::string_view line);

    bool operator==(const LogEntry&) const = default;
};

/// Append-only record of a session. Readers may block for new entries while
/// the control thread appends; every reader observes the same order.
class ExecutionLog
{
  public:
    ExecutionLog() = default;
    ExecutionLog(const ExecutionLog&) = delete;
    ExecutionLog& operator=(const ExecutionLog&) = delete;

    /// Mirrors every subsequent append to `path` (one line per entry). The
    /// optional header line is written first.
    void persist_to(const std::string& path, std::optional<std::string> header_line = std::nullopt);

    std::size_t append(EntryKind kind, std::int64_t tick, nlohmann::json payload);

    std::size_t size() const;
    std::vector<LogEntry> entries() const;
    std::vector<LogEntry> entries_from(std::size_t first) const;

    /// Blocks until more than `known` entries exist, the log is closed, or the
    /// timeout expires. Returns the entries from index `known` onward.
    std::vector<LogEntry> wait_for_more(std::size_t known, std::chrono::milliseconds timeout) const;

    /// Marks the end of a run; waiting readers wake up. Appending reopens it.
    void close();
    bool closed() const;

  private:
    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::vector<LogEntry> entries_;
    std::ofstream sink_;
    bool closed_ = false;
};

} // namespace skillloop
