// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace skillloop
{

struct Event
{
    std::uint64_t seq = 0;
    std::string text;
    std::int64_t injected_at = 0;
    std::optional<std::int64_t> consumed_at;
};

/// Poll-to-consume queue of text events. Events become visible to the agent
/// only through drain(); there is no push delivery or preemption path.
/// inject() may run on any thread; drain() belongs to the control thread.
class EventBus
{
  public:
    /// Returns the assigned sequence number. Throws std::invalid_argument on empty text.
    std::uint64_t inject(std::string text, std::int64_t tick);

    /// Returns every unconsumed event in sequence order and marks it consumed at `tick`.
    std::vector<Event> drain(std::int64_t tick);

    std::size_t pending() const;

    /// Every event ever injected, with consumption stamps.
    std::vector<Event> history() const;

    static std::string render(const std::vector<Event>& events);

  private:
    mutable std::mutex mutex_;
    std::vector<Event> events_;
    std::size_t first_pending_ = 0;
    std::uint64_t next_seq_ = 1;
};

} // namespace skillloop
