#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fdsim/time.hpp"

namespace fdsim {

enum class NodeKind : std::uint8_t { Host, EdgeTor, Aggregate, Core };

const char* to_string(NodeKind k);

struct NodeId {
    NodeKind kind = NodeKind::Host;
    int index = 0;  // index within its kind
    int pod = -1;   // -1 for cores; hosts inherit their edge's pod
};

// Undirected link; `a` is always the endpoint closer to the core tier.
struct Link {
    int a = -1;
    int b = -1;
    std::int64_t capacity_bps = 0;
    TimeNs delay_ns = 0;
    std::int64_t queue_bytes = 0;
    bool enabled = true;
};

struct FatTreeSpec {
    int num_cores = 4;
    int pods = 4;
    int aggs_per_pod = 2;
    int edges_per_pod = 2;
    int hosts_per_edge = 8;
    std::int64_t fabric_bps = 40'000'000'000;  // edge-agg and agg-core
    std::int64_t host_bps = 10'000'000'000;
    TimeNs link_delay_ns = 1'000;
    std::int64_t queue_bytes = 150'000;
    std::set<int> disabled_cores;  // static failures, e.g. {0}
};

// Built network. Global node numbering is hosts, then edge ToRs, then
// aggregates, then cores, each block in index order.
struct NetworkGraph {
    FatTreeSpec spec;
    std::vector<NodeId> nodes;
    std::vector<Link> links;
    std::vector<std::vector<int>> adjacency;  // node -> link ids

    int num_hosts() const { return spec.pods * spec.edges_per_pod * spec.hosts_per_edge; }
    int num_edges() const { return spec.pods * spec.edges_per_pod; }
    int num_aggs() const { return spec.pods * spec.aggs_per_pod; }

    int host_node(int i) const { return i; }
    int edge_node(int i) const { return num_hosts() + i; }
    int agg_node(int i) const { return num_hosts() + num_edges() + i; }
    int core_node(int i) const { return num_hosts() + num_edges() + num_aggs() + i; }

    // Edge ToR node id serving the given host node.
    int tor_of_host(int host_node_id) const;

    int peer(int link_id, int node_id) const {
        const Link& l = links[link_id];
        return l.a == node_id ? l.b : l.a;
    }
};

// Throws std::invalid_argument on non-positive counts, odd structure
// (aggs_per_pod not dividing num_cores) or disabled ids out of range.
NetworkGraph build_fat_tree(const FatTreeSpec& spec);

// All loop-free up-down paths between two edge ToRs over enabled links,
// as sequences of intermediate switch node ids (empty for src == dst).
// Sorted lexicographically, so the order is canonical.
std::vector<std::vector<int>> disjoint_paths(const NetworkGraph& g,
                                             int src_tor_node,
                                             int dst_tor_node);

// Sum of enabled core-tier link capacity crossing the fabric midline,
// counted once per core switch column.
std::int64_t bisection_bandwidth_bps(const NetworkGraph& g);

// "a b capacity_bps delay_ns enabled" per line, links in build order.
std::string dump_edge_list(const NetworkGraph& g);

}  // namespace fdsim
