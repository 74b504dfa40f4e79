#pragma once

#include "fedmesh/errors.hpp"
#include "fedmesh/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fedmesh::sim {

using TimeMs = std::int64_t;
using EntityId = std::uint32_t;

inline constexpr std::size_t kDefaultInboxCapacity = 1000;

template <class Payload>
struct SimEvent {
    TimeMs fire_at = 0;
    std::uint64_t seq = 0;
    EntityId target = 0;
    Payload payload;
};

/// A handler threw while processing an event. The message carries entity,
/// event kind, sequence number and virtual time.
struct HandlerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Single-threaded discrete-event loop. Events fire in (fire_at, seq) order;
/// seq is assigned at schedule time, so equal-time events run FIFO.
///
/// Payload must have an ADL-visible `std::string_view kind_name(const Payload&)`
/// used for the trace.
///
/// Every entity has an inbox bounded by `inbox_capacity` undelivered events;
/// scheduling past that throws BufferOverflow instead of dropping.
template <class Payload>
class EventLoop {
public:
    using Event = SimEvent<Payload>;
    using Handler = std::function<void(const Event&)>;

    explicit EventLoop(std::size_t inbox_capacity = kDefaultInboxCapacity) : capacity_(inbox_capacity) {}

    EventLoop(const EventLoop&) = delete;
    EventLoop& operator=(const EventLoop&) = delete;

    EntityId add_entity(std::string name) {
        names_.push_back(std::move(name));
        pending_.push_back(0);
        return static_cast<EntityId>(names_.size() - 1);
    }

    void set_handler(Handler h) { handler_ = std::move(h); }
    void set_trace(std::ostream* os) { trace_ = os; }

    std::uint64_t schedule(TimeMs delay_ms, EntityId target, Payload payload) {
        if (delay_ms < 0) throw InvalidArgument(fmt::format("schedule: negative delay {}", delay_ms));
        if (target >= names_.size()) throw InvalidArgument(fmt::format("schedule: unknown entity {}", target));
        if (pending_[target] >= capacity_) {
            throw BufferOverflow(fmt::format("inbox of '{}' full ({} undelivered messages) at t={}ms",
                                             names_[target], pending_[target], now_));
        }
        const std::uint64_t seq = next_seq_++;
        heap_.push_back(Event{now_ + delay_ms, seq, target, std::move(payload)});
        std::push_heap(heap_.begin(), heap_.end(), later);
        ++pending_[target];
        return seq;
    }

    /// Processes events until the queue drains, the next event would pass
    /// until_ms, or a handler calls stop(). Returns the number processed.
    std::size_t run(std::optional<TimeMs> until_ms = std::nullopt) {
        stop_ = false;
        std::size_t processed = 0;
        while (!heap_.empty() && !stop_) {
            if (until_ms && heap_.front().fire_at > *until_ms) break;
            std::pop_heap(heap_.begin(), heap_.end(), later);
            Event ev = std::move(heap_.back());
            heap_.pop_back();
            --pending_[ev.target];
            now_ = ev.fire_at;
            record(ev);
            if (handler_) {
                try {
                    handler_(ev);
                } catch (const std::exception& e) {
                    throw HandlerError(fmt::format("entity '{}' event {} (seq {}) at t={}ms: {}", names_[ev.target],
                                                   kind_name(ev.payload), ev.seq, ev.fire_at, e.what()));
                }
            }
            ++processed;
            ++total_;
        }
        return processed;
    }

    void stop() { stop_ = true; }

    TimeMs now() const { return now_; }
    bool idle() const { return heap_.empty(); }
    std::size_t queued() const { return heap_.size(); }
    std::size_t pending(EntityId id) const { return pending_.at(id); }
    std::size_t inbox_capacity() const { return capacity_; }
    const std::string& name(EntityId id) const { return names_.at(id); }
    std::size_t entity_count() const { return names_.size(); }
    std::uint64_t events_processed() const { return total_; }
    /// FNV-1a over every trace line emitted so far.
    std::uint64_t trace_hash() const { return trace_hash_; }

private:
    static bool later(const Event& a, const Event& b) {
        if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
        return a.seq > b.seq;
    }

    void record(const Event& ev) {
        const std::string line =
            fmt::format("{}\t{}\t{}\t{}\n", ev.fire_at, ev.seq, names_[ev.target], kind_name(ev.payload));
        trace_hash_ = fnv1a(line, trace_hash_);
        if (trace_) *trace_ << line;
    }

    std::size_t capacity_;
    std::vector<std::string> names_;
    std::vector<std::size_t> pending_;
    std::vector<Event> heap_;
    Handler handler_;
    std::ostream* trace_ = nullptr;
    TimeMs now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t total_ = 0;
    std::uint64_t trace_hash_ = 0xcbf29ce484222325ull;
    bool stop_ = false;
};

}  // namespace fedmesh::sim
