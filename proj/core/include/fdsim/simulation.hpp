#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fdsim/config.hpp"
#include "fdsim/dataplane.hpp"
#include "fdsim/engine.hpp"
#include "fdsim/flowdyn.hpp"
#include "fdsim/metrics.hpp"
#include "fdsim/random.hpp"
#include "fdsim/topology.hpp"
#include "fdsim/transport.hpp"
#include "fdsim/workload.hpp"

namespace fdsim {

struct SimCounters {
    std::int64_t data_segments_sent = 0;
    std::int64_t acks_sent = 0;
    std::int64_t packets_delivered = 0;
    std::int64_t drops = 0;
    std::int64_t probe_copies_sent = 0;   // per-link transmissions
    std::int64_t probes_consumed = 0;
    std::int64_t probe_bytes = 0;
    std::int64_t probes_returned_to_origin = 0;
    std::int64_t probe_loop_drops = 0;
    std::int64_t gap_headers_attached = 0;
    std::int64_t gap_headers_stored = 0;
};

struct FlowletEvent {
    int switch_node = -1;
    std::uint32_t flow = 0;
    bool is_ack = false;
    bool new_flowlet = false;
    int port = -1;
    TimeNs gap_used = 0;
    TimeNs time = 0;
};

// Ties the pieces together: packets on links, switches with their
// protocol state, hosts with TCP endpoints, probe circulation, and the
// metric taps. One instance per run; all state is owned here.
class Simulation {
  public:
    Simulation(const NetworkGraph& graph, const RunConfig& cfg);

    // TCP flow scheduled at `start`; returns the flow id.
    std::uint32_t start_flow(int src_host, int dst_host, std::int64_t bytes,
                             TimeNs start);
    void add_arrivals(const std::vector<FlowArrival>& arrivals);

    // Senderless flow for scripted scenarios; segments are injected with
    // inject_segment and acknowledged by the real receiver path.
    std::uint32_t register_scripted_flow(int src_host, int dst_host);
    void inject_segment(std::uint32_t flow, std::uint64_t seq,
                        std::uint32_t length, TimeNs at);

    void run_until(TimeNs t_end);

    Engine& engine() { return engine_; }
    const NetworkGraph& graph() const { return graph_; }
    const SimCounters& counters() const { return counters_; }

    std::vector<FlowRecord> flow_records() const;
    const TcpReceiver& receiver(std::uint32_t flow) const;
    const TcpSender& sender(std::uint32_t flow) const;

    // Protocol state taps for tests and the CLI.
    const TorFlowDyn& tor_state(int tor_node) const;
    TimeNs gap_for(int tor_node, int dst_tor_node) const;  // current table view
    std::string dump_tor_tables(int tor_node) const;

    // Per directed link accounting, indexed by dirlink id = 2*link + dir.
    struct LinkUsage {
        int from = -1, to = -1;
        std::int64_t total_bytes = 0;
        std::int64_t max_window_bytes = 0;
        std::int64_t drops = 0;
        double ewma_util = 0;
    };
    std::vector<LinkUsage> link_usage() const;  // finalizes windows at now
    const std::vector<PortSample>& port_samples() const { return samples_; }
    TimeNs util_window() const { return cfg_.probe_interval; }

    std::function<void(const FlowletEvent&)> flowlet_observer;

    // Test hook: overrides the propagation delay of the link between two
    // nodes before traffic runs.
    void set_link_delay(int node_a, int node_b, TimeNs delay);

  private:
    struct SimPacket {
        std::uint32_t wire = kMinWireBytes;
        bool is_probe = false;
        Segment seg;
        ProbeHeader probe;
    };

    struct DirLink {
        int from = -1, to = -1;
        int link_id = -1;
        int in_port_at_to = -1;  // port index on the receiving switch
        std::int64_t cap_bps = 0;
        TimeNs delay = 0;
        std::int64_t queue_cap = 0;
        bool enabled = true;
        bool from_is_host = false;
        std::deque<SimPacket> q;       // front is on the wire
        std::deque<SimPacket> flying;  // serialized, still propagating
        std::int64_t qbytes = 0;
        std::int64_t total_bytes = 0;
        std::int64_t drops = 0;
        TimeNs win_start = 0;
        std::int64_t win_bytes = 0;
        std::int64_t max_win_bytes = 0;
        double ewma_util = 0;
    };

    struct SwitchState {
        SwitchInfo info;
        std::uint64_t ecmp_salt = 0;
        std::unique_ptr<Rng> letflow_rng;
        FlowletTable flowlets;
        GapTable gaps;
        std::unique_ptr<HulaTable> hula;
        std::unique_ptr<TorFlowDyn> flowdyn;  // edge ToRs only
        std::vector<int> port_out_dirlink;    // port index -> dirlink id

        SwitchState(FlowletTable::Mode m, std::size_t slots)
            : flowlets(m, slots) {}
    };

    struct Flow {
        FiveTuple tuple;
        int src_host = -1, dst_host = -1;
        int src_tor = -1, dst_tor = -1;
        std::int64_t bytes = 0;
        TimeNs start = 0;
        bool scripted = false;
        std::unique_ptr<TcpSender> snd;
        std::unique_ptr<TcpReceiver> rcv;
        bool timer_pending = false;
    };

    struct Injection {
        std::uint32_t flow = 0;
        std::uint64_t seq = 0;
        std::uint32_t length = 0;
    };

    void dispatch(const Event& ev);
    void on_departure(int dirlink_id);
    void on_arrival(int dirlink_id);
    void enqueue(int dirlink_id, SimPacket&& pkt);
    void host_receive(int host, SimPacket& pkt);
    void switch_receive(int sw_node, SimPacket& pkt, int in_port);
    void route_data(SwitchState& sw, SimPacket& pkt);
    void handle_probe(SwitchState& sw, SimPacket& pkt, int in_port);
    void emit_probes(int tor_node);
    void reconcile_rto(std::uint32_t flow);
    void on_timer(std::uint32_t flow);
    void roll_windows(DirLink& dl);
    double ewma_after_idle(const DirLink& dl) const;
    int dirlink_from(int node, int peer) const;
    FiveTuple routing_tuple(const Flow& f, bool is_ack) const;

    class HostSink;

    NetworkGraph graph_;
    RunConfig cfg_;
    Engine engine_;
    std::vector<DirLink> dirlinks_;
    std::vector<std::unique_ptr<SwitchState>> switches_;  // by node id
    std::vector<int> host_uplink_;                        // host -> dirlink id
    std::vector<Flow> flows_;
    std::vector<Injection> injections_;
    std::vector<PortSample> samples_;
    SimCounters counters_;
    bool probes_on_ = false;
    TimeNs ewma_alpha_num_ = 1, ewma_alpha_den_ = 5;  // alpha = 0.2
};

}  // namespace fdsim
