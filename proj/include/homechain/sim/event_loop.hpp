#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace homechain {

// Deterministic discrete-event loop. Events at the same tick fire in
// scheduling order, so a run is a pure function of its inputs.
class EventLoop {
public:
    void at(std::uint64_t tick, std::function<void()> fn) {
        queue_.push(Event{tick < now_ ? now_ : tick, seq_++, std::move(fn)});
    }
    void after(std::uint64_t delay, std::function<void()> fn) { at(now_ + delay, std::move(fn)); }

    std::uint64_t now() const { return now_; }
    bool idle() const { return queue_.empty(); }
    std::size_t backlog() const { return queue_.size(); }

    // Processes every event up to and including max_tick; returns how many
    // ran. Events scheduled past the horizon stay queued (incomplete flows).
    std::size_t run(std::uint64_t max_tick) {
        std::size_t processed = 0;
        while (!queue_.empty() && queue_.top().tick <= max_tick) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.tick;
            ev.fn();
            ++processed;
        }
        if (now_ < max_tick) now_ = max_tick;
        return processed;
    }

private:
    struct Event {
        std::uint64_t tick = 0;
        std::uint64_t seq = 0;
        std::function<void()> fn;
        bool operator>(const Event& o) const {
            return tick != o.tick ? tick > o.tick : seq > o.seq;
        }
    };

    std::uint64_t now_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
};

}  // namespace homechain
