// SPDX-License-Identifier: Apache-2.0
#include <skillloop/event_bus.hpp>

#include <algorithm>
#include <stdexcept>

namespace skillloop
{

std::uint64_t EventBus::inject(std::string text, std::int64_t tick)
{
    if (text.empty())
        throw std::invalid_argument("event text must be non-empty");
    auto lock = std::lock_guard { mutex_ };
    const auto seq = next_seq_++;
    events_.push_back(Event { .seq = seq, .text = std::move(text), .injected_at = tick });
    return seq;
}

std::vector<Event> EventBus::drain(std::int64_t tick)
{
    auto lock = std::lock_guard { mutex_ };
    auto out = std::vector<Event> {};
    for (; first_pending_ < events_.size(); ++first_pending_)
    {
        auto& event = events_[first_pending_];
        // An event stamped after the consumer's clock (service thread racing ahead) is
        // still delivered, but its consumption stamp never precedes its injection.
        event.consumed_at = std::max(tick, event.injected_at);
        out.push_back(event);
    }
    return out;
}

std::size_t EventBus::pending() const
{
    auto lock = std::lock_guard { mutex_ };
    return events_.size() - first_pending_;
}

std::vector<Event> EventBus::history() const
{
    auto lock = std::lock_guard { mutex_ };
    return events_;
}

std::string EventBus::render(const std::vector<Event>& events)
{
    if (events.empty())
        return "no events";
    auto out = std::string {};
    for (const auto& event: events)
    {
        if (!out.empty())
            out += '\n';
        out += event.text;
    }
    return out;
}

} // namespace skillloop
