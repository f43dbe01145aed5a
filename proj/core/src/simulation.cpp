#include "fdsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdsim/random.hpp"

namespace fdsim {

namespace {
constexpr std::uint64_t kInjectBit = 1ULL << 62;
constexpr std::uint64_t kFlowKeySalt = 0x7a3c9b1f42d5e680ULL;
}  // namespace

class Simulation::HostSink : public SegmentSink {
  public:
    HostSink(Simulation& s, int host) : s_(s), host_(host) {}
    void send(Segment&& seg) override {
        SimPacket pkt;
        pkt.seg = std::move(seg);
        pkt.wire = static_cast<std::uint32_t>(segment_wire_bytes(pkt.seg));
        if (pkt.seg.is_ack)
            ++s_.counters_.acks_sent;
        else
            ++s_.counters_.data_segments_sent;
        s_.enqueue(s_.host_uplink_[host_], std::move(pkt));
    }

  private:
    Simulation& s_;
    int host_;
};

Simulation::Simulation(const NetworkGraph& graph, const RunConfig& cfg)
    : graph_(graph), cfg_(cfg) {
    engine_.set_dispatcher([this](const Event& ev) { dispatch(ev); });

    dirlinks_.resize(graph_.links.size() * 2);
    for (std::size_t l = 0; l < graph_.links.size(); ++l) {
        const Link& lk = graph_.links[l];
        for (int d = 0; d < 2; ++d) {
            DirLink& dl = dirlinks_[2 * l + d];
            dl.from = d == 0 ? lk.a : lk.b;
            dl.to = d == 0 ? lk.b : lk.a;
            dl.link_id = static_cast<int>(l);
            dl.cap_bps = lk.capacity_bps;
            dl.delay = lk.delay_ns;
            dl.queue_cap = lk.queue_bytes;
            dl.enabled = lk.enabled;
            dl.from_is_host = graph_.nodes[dl.from].kind == NodeKind::Host;
        }
    }

    switches_.resize(graph_.nodes.size());
    probes_on_ = cfg_.flowdyn || cfg_.scheme == Scheme::Hula;
    for (std::size_t n = 0; n < graph_.nodes.size(); ++n) {
        if (graph_.nodes[n].kind == NodeKind::Host) continue;
        auto sw = std::make_unique<SwitchState>(cfg_.flowlet_mode,
                                                cfg_.flowlet_slots);
        sw->info = make_switch_info(graph_, static_cast<int>(n));
        sw->ecmp_salt = mix_u64(0x5ca1ab1e00c0ffeeULL, n);
        sw->letflow_rng = std::make_unique<Rng>(mix_u64(cfg_.seed, n));
        if (cfg_.scheme == Scheme::Hula)
            sw->hula = std::make_unique<HulaTable>(cfg_.staleness);
        if (sw->info.kind == NodeKind::EdgeTor)
            sw->flowdyn = std::make_unique<TorFlowDyn>(
                static_cast<std::uint32_t>(n), cfg_.step, cfg_.staleness);
        sw->port_out_dirlink.resize(sw->info.ports.size());
        for (std::size_t p = 0; p < sw->info.ports.size(); ++p) {
            const int lid = sw->info.ports[p].link_id;
            sw->port_out_dirlink[p] =
                2 * lid + (graph_.links[lid].a == static_cast<int>(n) ? 0 : 1);
        }
        switches_[n] = std::move(sw);
    }
    for (DirLink& dl : dirlinks_)
        if (switches_[dl.to])
            dl.in_port_at_to = switches_[dl.to]->info.port_to(dl.from);

    host_uplink_.assign(graph_.num_hosts(), -1);
    for (int h = 0; h < graph_.num_hosts(); ++h) {
        if (graph_.adjacency[h].size() != 1)
            throw std::logic_error("hosts must have exactly one link");
        const int lid = graph_.adjacency[h][0];
        host_uplink_[h] = 2 * lid + (graph_.links[lid].a == h ? 0 : 1);
    }

    if (probes_on_) {
        const int edges = graph_.num_edges();
        for (int e = 0; e < edges; ++e) {
            // Staggered start smooths probe bursts across the interval.
            const TimeNs t0 = cfg_.probe_interval * e / edges;
            engine_.schedule(t0, EventKind::ProbeEmit, graph_.edge_node(e));
        }
    }
}

std::uint32_t Simulation::start_flow(int src_host, int dst_host,
                                     std::int64_t bytes, TimeNs start) {
    if (src_host == dst_host)
        throw std::invalid_argument("flow endpoints must differ");
    if (bytes <= 0) throw std::invalid_argument("flow size must be positive");
    const auto id = static_cast<std::uint32_t>(flows_.size());
    Flow f;
    f.src_host = src_host;
    f.dst_host = dst_host;
    f.src_tor = graph_.tor_of_host(src_host);
    f.dst_tor = graph_.tor_of_host(dst_host);
    f.bytes = bytes;
    f.start = start;
    f.tuple = FiveTuple{static_cast<std::uint32_t>(src_host),
                        static_cast<std::uint32_t>(dst_host),
                        static_cast<std::uint16_t>(10000 + id % 50000), 80, 6};
    f.snd = std::make_unique<TcpSender>(id, bytes, cfg_.tcp);
    f.rcv = std::make_unique<TcpReceiver>(bytes);
    flows_.push_back(std::move(f));
    engine_.schedule(start, EventKind::FlowStart, src_host, id, 0);
    return id;
}

void Simulation::add_arrivals(const std::vector<FlowArrival>& arrivals) {
    flows_.reserve(flows_.size() + arrivals.size());
    for (const FlowArrival& a : arrivals)
        start_flow(a.src_host, a.dst_host, a.bytes, a.start);
}

std::uint32_t Simulation::register_scripted_flow(int src_host, int dst_host) {
    if (src_host == dst_host)
        throw std::invalid_argument("flow endpoints must differ");
    const auto id = static_cast<std::uint32_t>(flows_.size());
    Flow f;
    f.src_host = src_host;
    f.dst_host = dst_host;
    f.src_tor = graph_.tor_of_host(src_host);
    f.dst_tor = graph_.tor_of_host(dst_host);
    f.scripted = true;
    f.tuple = FiveTuple{static_cast<std::uint32_t>(src_host),
                        static_cast<std::uint32_t>(dst_host),
                        static_cast<std::uint16_t>(10000 + id % 50000), 80, 6};
    f.rcv = std::make_unique<TcpReceiver>(-1);
    flows_.push_back(std::move(f));
    return id;
}

void Simulation::inject_segment(std::uint32_t flow, std::uint64_t seq,
                                std::uint32_t length, TimeNs at) {
    if (flow >= flows_.size()) throw std::invalid_argument("unknown flow");
    const auto idx = static_cast<std::uint64_t>(injections_.size());
    injections_.push_back({flow, seq, length});
    engine_.schedule(at, EventKind::FlowStart, flows_[flow].src_host, flow,
                     idx | kInjectBit);
}

void Simulation::run_until(TimeNs t_end) { engine_.run_until(t_end); }

void Simulation::dispatch(const Event& ev) {
    switch (ev.kind) {
        case EventKind::PacketDeparture:
            on_departure(static_cast<int>(ev.arg0));
            return;
        case EventKind::PacketArrival:
            on_arrival(static_cast<int>(ev.arg0));
            return;
        case EventKind::TimerFire:
            on_timer(static_cast<std::uint32_t>(ev.arg0));
            return;
        case EventKind::ProbeEmit:
            emit_probes(ev.node);
            return;
        case EventKind::FlowStart: {
            if (ev.arg1 & kInjectBit) {
                const Injection& inj = injections_[ev.arg1 & ~kInjectBit];
                Segment s;
                s.flow = inj.flow;
                s.seq = inj.seq;
                s.length = inj.length;
                s.sent_time = engine_.now();
                HostSink sink(*this, flows_[inj.flow].src_host);
                sink.send(std::move(s));
                return;
            }
            Flow& f = flows_[ev.arg0];
            HostSink sink(*this, f.src_host);
            f.snd->start(engine_.now(), sink);
            reconcile_rto(static_cast<std::uint32_t>(ev.arg0));
            return;
        }
    }
}

void Simulation::enqueue(int dirlink_id, SimPacket&& pkt) {
    DirLink& dl = dirlinks_[dirlink_id];
    if (!dl.enabled) {
        ++dl.drops;
        ++counters_.drops;
        return;
    }
    if (!dl.q.empty() && dl.qbytes + pkt.wire > dl.queue_cap) {
        ++dl.drops;
        ++counters_.drops;
        return;
    }
    dl.qbytes += pkt.wire;
    dl.q.push_back(std::move(pkt));
    if (dl.q.size() == 1)
        engine_.schedule(engine_.now() + tx_time_ns(dl.q.front().wire, dl.cap_bps),
                         EventKind::PacketDeparture, dl.from, dirlink_id);
}

void Simulation::roll_windows(DirLink& dl) {
    const TimeNs W = cfg_.probe_interval;
    const TimeNs now = engine_.now();
    if (now - dl.win_start < W) return;
    const std::int64_t k = (now - dl.win_start) / W;

    dl.max_win_bytes = std::max(dl.max_win_bytes, dl.win_bytes);
    if (cfg_.collect_port_samples && dl.win_bytes > 0) {
        int port = -1;
        if (switches_[dl.from]) port = switches_[dl.from]->info.port_to(dl.to);
        samples_.push_back({dl.from, port, dl.win_start, dl.win_bytes});
    }
    const double alpha = 0.2;
    const double u0 = static_cast<double>(dl.win_bytes) * 8.0 * 1e9 /
                      (static_cast<double>(dl.cap_bps) * W);
    dl.ewma_util = (1 - alpha) * dl.ewma_util + alpha * u0;
    if (k > 1) dl.ewma_util *= std::pow(1 - alpha, static_cast<double>(k - 1));
    dl.win_start += k * W;
    dl.win_bytes = 0;
}

void Simulation::on_departure(int dirlink_id) {
    DirLink& dl = dirlinks_[dirlink_id];
    SimPacket pkt = std::move(dl.q.front());
    dl.q.pop_front();
    dl.qbytes -= pkt.wire;

    roll_windows(dl);
    dl.win_bytes += pkt.wire;
    dl.total_bytes += pkt.wire;
    if (pkt.is_probe) {
        ++counters_.probe_copies_sent;
        counters_.probe_bytes +=
            static_cast<std::int64_t>(pkt.probe.wire_size());
    }

    engine_.schedule(engine_.now() + dl.delay, EventKind::PacketArrival, dl.to,
                     dirlink_id);
    dl.flying.push_back(std::move(pkt));
    if (!dl.q.empty())
        engine_.schedule(engine_.now() + tx_time_ns(dl.q.front().wire, dl.cap_bps),
                         EventKind::PacketDeparture, dl.from, dirlink_id);
}

void Simulation::on_arrival(int dirlink_id) {
    DirLink& dl = dirlinks_[dirlink_id];
    SimPacket pkt = std::move(dl.flying.front());
    dl.flying.pop_front();
    ++counters_.packets_delivered;
    if (graph_.nodes[dl.to].kind == NodeKind::Host)
        host_receive(dl.to, pkt);
    else
        switch_receive(dl.to, pkt, dl.in_port_at_to);
}

void Simulation::host_receive(int host, SimPacket& pkt) {
    if (pkt.is_probe) throw std::logic_error("probe reached a host");
    Segment& seg = pkt.seg;
    Flow& f = flows_[seg.flow];
    if (seg.is_ack) {
        if (!f.snd) return;  // scripted flows ignore their ACKs
        HostSink sink(*this, f.src_host);
        f.snd->on_ack(seg, engine_.now(), sink);
        reconcile_rto(seg.flow);
        return;
    }
    const std::uint64_t ack = f.rcv->on_data(seg);
    Segment a;
    a.flow = seg.flow;
    a.is_ack = true;
    a.ack_seq = ack;
    a.sent_time = engine_.now();
    HostSink sink(*this, host);
    sink.send(std::move(a));
}

FiveTuple Simulation::routing_tuple(const Flow& f, bool is_ack) const {
    if (!is_ack) return f.tuple;
    return FiveTuple{f.tuple.dst_addr, f.tuple.src_addr, f.tuple.dst_port,
                     f.tuple.src_port, f.tuple.proto};
}

void Simulation::switch_receive(int sw_node, SimPacket& pkt, int in_port) {
    SwitchState& sw = *switches_[sw_node];
    if (pkt.is_probe) {
        handle_probe(sw, pkt, in_port);
        return;
    }
    Segment& seg = pkt.seg;
    if (cfg_.flowdyn) {
        if (seg.has_gap) {
            if (store_gap(sw.gaps, seg.gap, engine_.now()))
                ++counters_.gap_headers_stored;
        } else if (sw.info.kind == NodeKind::EdgeTor && in_port >= 0 &&
                   sw.info.ports[in_port].peer_kind == NodeKind::Host) {
            // Source ToR: advertise our measured gap to the destination side.
            const Flow& f = flows_[seg.flow];
            const int dst_tor = seg.is_ack ? f.src_tor : f.dst_tor;
            if (dst_tor != sw_node) {
                if (auto h = sw.flowdyn->make_gap_header(
                        static_cast<std::uint32_t>(dst_tor), engine_.now())) {
                    seg.has_gap = true;
                    seg.gap = *h;
                    pkt.wire = static_cast<std::uint32_t>(segment_wire_bytes(seg));
                    ++counters_.gap_headers_attached;
                }
            }
        }
    }
    route_data(sw, pkt);
}

void Simulation::route_data(SwitchState& sw, SimPacket& pkt) {
    Segment& seg = pkt.seg;
    const Flow& f = flows_[seg.flow];
    const int dst_host = seg.is_ack ? f.src_host : f.dst_host;
    const int dst_tor = seg.is_ack ? f.src_tor : f.dst_tor;
    const TimeNs now = engine_.now();

    int port = -1;
    if (sw.info.kind == NodeKind::EdgeTor && dst_tor == sw.info.node) {
        port = sw.info.port_to(dst_host);
        if (seg.has_gap) {
            // Last switch before the server: the header has done its job.
            seg.has_gap = false;
            pkt.wire = static_cast<std::uint32_t>(segment_wire_bytes(seg));
        }
    } else {
        const std::vector<int>* cands = nullptr;
        switch (sw.info.kind) {
            case NodeKind::EdgeTor:
                cands = &sw.info.up_ports;
                break;
            case NodeKind::Aggregate:
                if (graph_.nodes[dst_tor].pod == sw.info.pod)
                    port = sw.info.port_to(dst_tor);
                else
                    cands = &sw.info.up_ports;
                break;
            case NodeKind::Core:
                for (int p : sw.info.down_ports)
                    if (sw.info.ports[p].peer_pod == graph_.nodes[dst_tor].pod) {
                        port = p;
                        break;
                    }
                break;
            case NodeKind::Host:
                throw std::logic_error("host in switch path");
        }
        if (port < 0) {
            if (!cands || cands->empty()) {
                ++counters_.drops;
                return;
            }
            if (cands->size() == 1) {
                port = (*cands)[0];
            } else if (cfg_.scheme == Scheme::Ecmp) {
                // Per-flow deterministic; a flowlet re-decision could never
                // pick differently, so the table is skipped entirely.
                port = ecmp_pick(routing_tuple(f, seg.is_ack), sw.ecmp_salt,
                                 *cands);
            } else {
                const FiveTuple tuple = routing_tuple(f, seg.is_ack);
                const std::uint64_t key = tuple_hash(tuple, kFlowKeySalt);
                const TimeNs gap =
                    cfg_.flowdyn
                        ? current_gap(sw.gaps,
                                      static_cast<std::uint32_t>(dst_tor), now,
                                      cfg_.staleness, cfg_.static_gap)
                        : cfg_.static_gap;
                const auto live = sw.flowlets.classify(key, now, gap);
                if (live) {
                    port = *live;
                } else {
                    if (cfg_.scheme == Scheme::Hula) {
                        auto best = sw.hula->best_port(
                            static_cast<std::uint32_t>(dst_tor), now);
                        if (best && std::find(cands->begin(), cands->end(),
                                              *best) != cands->end())
                            port = *best;
                        else
                            port = ecmp_pick(tuple, sw.ecmp_salt, *cands);
                    } else {
                        port = (*cands)[sw.letflow_rng->next_below(
                            cands->size())];
                    }
                    sw.flowlets.commit(key, port, now);
                }
                if (flowlet_observer)
                    flowlet_observer({sw.info.node, seg.flow, seg.is_ack,
                                      !live.has_value(), port, gap, now});
            }
        }
    }
    if (port < 0) {
        ++counters_.drops;
        return;
    }
    enqueue(sw.port_out_dirlink[port], std::move(pkt));
}

void Simulation::handle_probe(SwitchState& sw, SimPacket& pkt, int in_port) {
    ProbeHeader& pr = pkt.probe;
    if (pr.visited(static_cast<std::uint32_t>(sw.info.node))) {
        ++counters_.probe_loop_drops;
        return;
    }
    if (sw.hula && pr.has_util && in_port >= 0) {
        // Congestion data packets toward the origin would see: the
        // utilization of this switch's link back out of the ingress port.
        DirLink& rev = dirlinks_[sw.port_out_dirlink[in_port]];
        roll_windows(rev);
        pr.util = std::max(pr.util, quantize_util(rev.ewma_util));
        sw.hula->update(pr.origin_tor, in_port, pr.util, engine_.now());
    }
    const ProbeRoute r =
        route_probe(sw.info, pr.origin_tor,
                    graph_.nodes[pr.origin_tor].pod, in_port);
    switch (r.action) {
        case ProbeAction::ReturnedToOrigin:
            ++counters_.probes_returned_to_origin;
            return;
        case ProbeAction::Consume:
            ++counters_.probes_consumed;
            if (sw.flowdyn) sw.flowdyn->on_probe(pr, engine_.now());
            return;
        case ProbeAction::Forward: {
            if (r.append_self)
                pr.add_hop(static_cast<std::uint32_t>(sw.info.node));
            const auto wire = static_cast<std::uint32_t>(
                kBaseHeaderBytes + pr.wire_size());
            for (int p : r.egress_ports) {
                SimPacket copy;
                copy.is_probe = true;
                copy.probe = pr;
                copy.wire = wire;
                enqueue(sw.port_out_dirlink[p], std::move(copy));
            }
            return;
        }
    }
}

void Simulation::emit_probes(int tor_node) {
    SwitchState& sw = *switches_[tor_node];
    ProbeHeader pr;
    pr.origin_tor = static_cast<std::uint32_t>(tor_node);
    pr.timestamp = engine_.now();
    pr.seq = sw.flowdyn->next_probe_seq();
    pr.has_util = cfg_.scheme == Scheme::Hula;
    pr.util = 0;
    const auto wire =
        static_cast<std::uint32_t>(kBaseHeaderBytes + pr.wire_size());
    for (int p : emit_ports(sw.info)) {
        SimPacket pkt;
        pkt.is_probe = true;
        pkt.probe = pr;
        pkt.wire = wire;
        enqueue(sw.port_out_dirlink[p], std::move(pkt));
    }
    engine_.schedule(engine_.now() + cfg_.probe_interval, EventKind::ProbeEmit,
                     tor_node);
}

void Simulation::reconcile_rto(std::uint32_t flow) {
    Flow& f = flows_[flow];
    if (!f.snd || f.timer_pending || f.snd->complete()) return;
    const TimeNs d = f.snd->rto_deadline();
    if (d == kTimeInf) return;
    engine_.schedule(d, EventKind::TimerFire, f.src_host, flow);
    f.timer_pending = true;
}

void Simulation::on_timer(std::uint32_t flow) {
    Flow& f = flows_[flow];
    f.timer_pending = false;
    if (!f.snd || f.snd->complete()) return;
    const TimeNs d = f.snd->rto_deadline();
    if (d == kTimeInf) return;
    if (engine_.now() < d) {
        // The sender made progress since this timer was armed.
        engine_.schedule(d, EventKind::TimerFire, f.src_host, flow);
        f.timer_pending = true;
        return;
    }
    HostSink sink(*this, f.src_host);
    f.snd->on_rto(f.snd->rto_generation(), engine_.now(), sink);
    reconcile_rto(flow);
}

std::vector<FlowRecord> Simulation::flow_records() const {
    std::vector<FlowRecord> out;
    out.reserve(flows_.size());
    for (std::size_t i = 0; i < flows_.size(); ++i) {
        const Flow& f = flows_[i];
        FlowRecord r;
        r.flow = static_cast<std::uint32_t>(i);
        r.src_host = f.src_host;
        r.dst_host = f.dst_host;
        r.bytes = f.bytes;
        r.start = f.start;
        if (f.snd && f.snd->complete()) {
            r.completed = true;
            r.finish = f.snd->finish_time();
        }
        r.reorder_events = f.rcv ? f.rcv->reorder_events() : 0;
        r.retransmits = f.snd ? f.snd->retransmits() : 0;
        r.timeouts = f.snd ? f.snd->timeouts() : 0;
        out.push_back(r);
    }
    return out;
}

const TcpReceiver& Simulation::receiver(std::uint32_t flow) const {
    return *flows_.at(flow).rcv;
}

const TcpSender& Simulation::sender(std::uint32_t flow) const {
    if (!flows_.at(flow).snd) throw std::logic_error("scripted flow has no sender");
    return *flows_.at(flow).snd;
}

const TorFlowDyn& Simulation::tor_state(int tor_node) const {
    const auto& sw = switches_.at(tor_node);
    if (!sw || !sw->flowdyn)
        throw std::invalid_argument("node is not an edge ToR");
    return *sw->flowdyn;
}

TimeNs Simulation::gap_for(int tor_node, int dst_tor_node) const {
    const auto& sw = switches_.at(tor_node);
    if (!sw) throw std::invalid_argument("not a switch");
    return current_gap(sw->gaps, static_cast<std::uint32_t>(dst_tor_node),
                       engine_.now(), cfg_.staleness, cfg_.static_gap);
}

std::string Simulation::dump_tor_tables(int tor_node) const {
    return tor_state(tor_node).dump_tables();
}

std::vector<Simulation::LinkUsage> Simulation::link_usage() const {
    std::vector<LinkUsage> out;
    out.reserve(dirlinks_.size());
    for (const DirLink& dl : dirlinks_) {
        LinkUsage u;
        u.from = dl.from;
        u.to = dl.to;
        u.total_bytes = dl.total_bytes;
        // A trailing partial window can still hold the maximum.
        u.max_window_bytes = std::max(dl.max_win_bytes, dl.win_bytes);
        u.drops = dl.drops;
        u.ewma_util = dl.ewma_util;
        out.push_back(u);
    }
    return out;
}

void Simulation::set_link_delay(int node_a, int node_b, TimeNs delay) {
    if (delay < 0) throw std::invalid_argument("delay must be >= 0");
    bool found = false;
    for (int lid : graph_.adjacency[node_a]) {
        if (graph_.peer(lid, node_a) != node_b) continue;
        graph_.links[lid].delay_ns = delay;
        dirlinks_[2 * lid].delay = delay;
        dirlinks_[2 * lid + 1].delay = delay;
        found = true;
    }
    if (!found) throw std::invalid_argument("no such link");
}

int Simulation::dirlink_from(int node, int peer) const {
    for (int lid : graph_.adjacency[node])
        if (graph_.peer(lid, node) == peer)
            return 2 * lid + (graph_.links[lid].a == node ? 0 : 1);
    throw std::invalid_argument("no such link");
}

}  // namespace fdsim
