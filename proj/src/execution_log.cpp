// SPDX-License-Identifier: Apache-2.0
#include <skillloop/execution_log.hpp>

#include <array>
#include <stdexcept>

namespace skillloop
{

namespace
{

constexpr auto kind_names = std::array<std::string_view, 8> {
    "utterance", "routing", "reflection", "tool_call", "tool_result", "event", "final_text", "critic_verdict",
};

} // namespace

std::string_view to_string(EntryKind kind)
{
    return kind_names.at(static_cast<std::size_t>(kind));
}

EntryKind parse_entry_kind(std::string_view text)
{
    for (auto i = std::size_t { 0 }; i < kind_names.size(); ++i)
        if (kind_names[i] == text)
            return static_cast<EntryKind>(i);
    throw std::invalid_argument("unknown log entry kind '" + std::string(text) + "'");
}

std::string LogEntry::to_line() const
{
    auto doc = nlohmann::json {
        { "seq", seq },
        { "kind", to_string(kind) },
        { "tick", tick },
        { "payload", payload },
    };
    return doc.dump();
}

LogEntry LogEntry::from_line(std::string_view line)
{
    try
    {
        const auto doc = nlohmann::json::parse(line);
        return LogEntry {
            .seq = doc.at("seq").get<std::size_t>(),
            .kind = parse_entry_kind(doc.at("kind").get<std::string>()),
            .tick = doc.at("tick").get<std::int64_t>(),
            .payload = doc.at("payload"),
        };
    }
    catch (const nlohmann::json::exception& e)
    {
        throw std::invalid_argument(std::string("malformed log entry: ") + e.what());
    }
}

void ExecutionLog::persist_to(const std::string& path, std::optional<std::string> header_line)
{
    auto lock = std::lock_guard { mutex_ };
    sink_ = std::ofstream(path, std::ios::out | std::ios::trunc);
    if (!sink_)
        throw std::runtime_error("cannot open log file " + path);
    if (header_line)
        sink_ << *header_line << '\n';
    for (const auto& entry: entries_)
        sink_ << entry.to_line() << '\n';
    sink_.flush();
}

std::size_t ExecutionLog::append(EntryKind kind, std::int64_t tick, nlohmann::json payload)
{
    auto lock = std::lock_guard { mutex_ };
    const auto seq = entries_.size();
    entries_.push_back(LogEntry { .seq = seq, .kind = kind, .tick = tick, .payload = std::move(payload) });
    if (sink_.is_open())
    {
        sink_ << entries_.back().to_line() << '\n';
        sink_.flush();
    }
    closed_ = false;
    changed_.notify_all();
    return seq;
}

std::size_t ExecutionLog::size() const
{
    auto lock = std::lock_guard { mutex_ };
    return entries_.size();
}

std::vector<LogEntry> ExecutionLog::entries() const
{
    return entries_from(0);
}

std::vector<LogEntry> ExecutionLog::entries_from(std::size_t first) const
{
    auto lock = std::lock_guard { mutex_ };
    if (first >= entries_.size())
        return {};
    return { entries_.begin() + static_cast<std::ptrdiff_t>(first), entries_.end() };
}

std::vector<LogEntry> ExecutionLog::wait_for_more(std::size_t known, std::chrono::milliseconds timeout) const
{
    auto lock = std::unique_lock { mutex_ };
    changed_.wait_for(lock, timeout, [&] { return entries_.size() > known || closed_; });
    if (known >= entries_.size())
        return {};
    return { entries_.begin() + static_cast<std::ptrdiff_t>(known), entries_.end() };
}

void ExecutionLog::close()
{
    auto lock = std::lock_guard { mutex_ };
    closed_ = true;
    changed_.notify_all();
}

bool ExecutionLog::closed() const
{
    auto lock = std::lock_guard { mutex_ };
    return closed_;
}

} // namespace skillloop
