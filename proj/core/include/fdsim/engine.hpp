#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "fdsim/time.hpp"

namespace fdsim {

enum class EventKind : std::uint8_t {
    PacketArrival,
    PacketDeparture,
    TimerFire,
    FlowStart,
    ProbeEmit,
};

const char* to_string(EventKind k);

// POD event record. Payload words are interpreted by the dispatcher based
// on kind; packets themselves live in per-link queues, never in events.
struct Event {
    TimeNs time = 0;
    std::uint64_t seq = 0;  // engine-assigned, breaks ties FIFO
    EventKind kind = EventKind::TimerFire;
    std::int32_t node = -1;
    std::uint64_t arg0 = 0;
    std::uint64_t arg1 = 0;
};

struct EventHandle {
    std::uint64_t seq = 0;
};

// Single-threaded discrete-event loop ordered by (time, insertion seq).
// Scheduling into the past is a logic error and throws; same-timestamp
// events dispatch in insertion order, which makes runs reproducible.
class Engine {
  public:
    using Dispatcher = std::function<void(const Event&)>;
    using Tracer = std::function<void(const Event&)>;

    Engine() = default;

    void set_dispatcher(Dispatcher d) { dispatch_ = std::move(d); }
    void set_tracer(Tracer t) { trace_ = std::move(t); }

    TimeNs now() const { return now_; }
    bool empty() const { return live_.empty(); }
    std::size_t pending() const { return live_.size(); }
    std::uint64_t processed() const { return processed_; }

    EventHandle schedule(TimeNs time, EventKind kind, std::int32_t node = -1,
                         std::uint64_t arg0 = 0, std::uint64_t arg1 = 0);

    // Cancelling an already-fired or unknown handle is a no-op.
    void cancel(EventHandle h) { live_.erase(h.seq); }

    // Dispatches every live event with time <= t_end in order, then parks
    // the clock at t_end. Returns the number of events dispatched.
    std::uint64_t run_until(TimeNs t_end);

  private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::unordered_set<std::uint64_t> live_;
    TimeNs now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
    Dispatcher dispatch_;
    Tracer trace_;
};

}  // namespace fdsim
