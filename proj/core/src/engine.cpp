#include "fdsim/engine.hpp"

#include <stdexcept>
#include <string>

namespace fdsim {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::PacketArrival: return "PacketArrival";
        case EventKind::PacketDeparture: return "PacketDeparture";
        case EventKind::TimerFire: return "TimerFire";
        case EventKind::FlowStart: return "FlowStart";
        case EventKind::ProbeEmit: return "ProbeEmit";
    }
    return "?";
}

EventHandle Engine::schedule(TimeNs time, EventKind kind, std::int32_t node,
                             std::uint64_t arg0, std::uint64_t arg1) {
    if (time < now_)
        throw std::logic_error("schedule into the past: t=" +
                               std::to_string(time) +
                               " now=" + std::to_string(now_));
    Event ev{time, next_seq_++, kind, node, arg0, arg1};
    heap_.push(ev);
    live_.insert(ev.seq);
    return EventHandle{ev.seq};
}

std::uint64_t Engine::run_until(TimeNs t_end) {
    if (!dispatch_) throw std::logic_error("run_until without a dispatcher");
    std::uint64_t dispatched = 0;
    while (!heap_.empty() && heap_.top().time <= t_end) {
        Event ev = heap_.top();
        heap_.pop();
        if (live_.erase(ev.seq) == 0) continue;  // cancelled
        now_ = ev.time;
        if (trace_) trace_(ev);
        dispatch_(ev);
        ++dispatched;
    }
    if (t_end > now_) now_ = t_end;
    processed_ += dispatched;
    return dispatched;
}

}  // namespace fdsim
