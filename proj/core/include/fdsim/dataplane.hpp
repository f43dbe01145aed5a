#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fdsim/codec.hpp"
#include "fdsim/time.hpp"
#include "fdsim/topology.hpp"

namespace fdsim {

enum class Scheme : std::uint8_t { Ecmp, LetFlow, Hula };

const char* to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& s);

struct FiveTuple {
    std::uint32_t src_addr = 0;
    std::uint32_t dst_addr = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t proto = 6;
};

// Stable across runs and toolchains; never std::hash.
std::uint64_t tuple_hash(const FiveTuple& t, std::uint64_t salt);

// Deterministic per-hop choice: hash of the 5-tuple and the switch salt.
int ecmp_pick(const FiveTuple& t, std::uint64_t switch_salt,
              const std::vector<int>& candidates);

// Flowlet state. Exact mode keys entries individually; hashed mode models
// a fixed-size direct-mapped hardware table where a colliding commit
// evicts the previous owner.
class FlowletTable {
  public:
    enum class Mode : std::uint8_t { Exact, Hashed };

    explicit FlowletTable(Mode m = Mode::Exact, std::size_t slots = 4096);

    // Live entry within the gap: refreshes last_seen and returns its port.
    // Otherwise the caller must make a fresh routing decision and commit.
    std::optional<int> classify(std::uint64_t key, TimeNs now, TimeNs gap);
    void commit(std::uint64_t key, int port, TimeNs now);

    std::size_t entries() const;

  private:
    struct Slot {
        std::uint64_t key = 0;
        TimeNs last_seen = 0;
        int port = -1;
        bool used = false;
    };
    Mode mode_;
    std::unordered_map<std::uint64_t, Slot> exact_;
    std::vector<Slot> slots_;
};

// Best next hop toward each origin ToR, learned from probe utilization.
class HulaTable {
  public:
    explicit HulaTable(TimeNs staleness = ms(1)) : staleness_(staleness) {}

    // Replace on lower utilization, on staleness, or when the entry is
    // missing; a probe from the currently chosen port always refreshes,
    // so a worsening best path is still tracked honestly.
    void update(std::uint32_t origin_tor, int ingress_port, std::uint8_t util,
                TimeNs now);
    std::optional<int> best_port(std::uint32_t origin_tor, TimeNs now) const;

  private:
    struct Entry {
        int port = -1;
        std::uint8_t util = 255;
        TimeNs updated = 0;
    };
    TimeNs staleness_;
    std::unordered_map<std::uint32_t, Entry> best_;
};

std::uint8_t quantize_util(double utilization);

// Static per-switch view used by probe replication and routing; built
// once from the graph. Ports are sorted by peer node id. Disabled links
// are kept out of the candidate lists but keep their port slot.
struct SwitchPort {
    int link_id = -1;
    int peer = -1;
    NodeKind peer_kind = NodeKind::Host;
    int peer_pod = -1;
    bool enabled = true;
};

struct SwitchInfo {
    int node = -1;
    NodeKind kind = NodeKind::EdgeTor;
    int pod = -1;
    std::vector<SwitchPort> ports;
    std::vector<int> up_ports;     // enabled, toward the tier above
    std::vector<int> down_ports;   // enabled, toward switches below
    std::vector<int> host_ports;   // enabled, toward hosts (edge only)

    int port_to(int peer_node) const;
};

SwitchInfo make_switch_info(const NetworkGraph& g, int node);

enum class ProbeAction : std::uint8_t { Forward, Consume, ReturnedToOrigin };

struct ProbeRoute {
    ProbeAction action = ProbeAction::Consume;
    bool append_self = false;           // record this switch in the hop list
    std::vector<int> egress_ports;      // port indices, valid for Forward
};

// Replication rules. The origin edge ToR floods its uplinks at emission
// (see emit_ports); afterwards: an aggregate in the origin pod copies
// down to every other edge and up to every core above it, a core copies
// down to every pod except the origin's, a foreign-pod aggregate copies
// down to all its edges, and any other edge ToR consumes. Probes never
// ride host links and a copy reaching its origin again is dropped.
ProbeRoute route_probe(const SwitchInfo& sw, std::uint32_t origin_tor_node,
                       int origin_pod, int ingress_port);

// Egress ports for a probe freshly emitted by this edge ToR.
const std::vector<int>& emit_ports(const SwitchInfo& sw);

}  // namespace fdsim
