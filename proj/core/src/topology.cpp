#include "fdsim/topology.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace fdsim {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Host: return "host";
        case NodeKind::EdgeTor: return "edge";
        case NodeKind::Aggregate: return "agg";
        case NodeKind::Core: return "core";
    }
    return "?";
}

int NetworkGraph::tor_of_host(int host_node_id) const {
    if (host_node_id < 0 || host_node_id >= num_hosts())
        throw std::invalid_argument("tor_of_host: not a host node");
    return edge_node(host_node_id / spec.hosts_per_edge);
}

static void validate(const FatTreeSpec& s) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("fat tree spec: " + m); };
    if (s.num_cores < 1) fail("num_cores must be >= 1");
    if (s.pods < 1) fail("pods must be >= 1");
    if (s.aggs_per_pod < 1) fail("aggs_per_pod must be >= 1");
    if (s.edges_per_pod < 1) fail("edges_per_pod must be >= 1");
    if (s.hosts_per_edge < 1) fail("hosts_per_edge must be >= 1");
    if (s.num_cores % s.aggs_per_pod != 0)
        fail("num_cores must be a multiple of aggs_per_pod");
    if (s.fabric_bps <= 0 || s.host_bps <= 0) fail("link rates must be positive");
    if (s.link_delay_ns < 0) fail("link delay must be >= 0");
    if (s.queue_bytes <= 0) fail("queue_bytes must be positive");
    for (int c : s.disabled_cores)
        if (c < 0 || c >= s.num_cores) fail("disabled core id out of range");
}

NetworkGraph build_fat_tree(const FatTreeSpec& spec) {
    validate(spec);
    NetworkGraph g;
    g.spec = spec;

    const int hosts = spec.pods * spec.edges_per_pod * spec.hosts_per_edge;
    const int edges = spec.pods * spec.edges_per_pod;
    const int aggs = spec.pods * spec.aggs_per_pod;

    g.nodes.reserve(hosts + edges + aggs + spec.num_cores);
    for (int i = 0; i < hosts; ++i) {
        int pod = (i / spec.hosts_per_edge) / spec.edges_per_pod;
        g.nodes.push_back({NodeKind::Host, i, pod});
    }
    for (int i = 0; i < edges; ++i)
        g.nodes.push_back({NodeKind::EdgeTor, i, i / spec.edges_per_pod});
    for (int i = 0; i < aggs; ++i)
        g.nodes.push_back({NodeKind::Aggregate, i, i / spec.aggs_per_pod});
    for (int i = 0; i < spec.num_cores; ++i)
        g.nodes.push_back({NodeKind::Core, i, -1});

    g.adjacency.assign(g.nodes.size(), {});
    auto add_link = [&](int a, int b, std::int64_t bps, bool enabled) {
        int id = static_cast<int>(g.links.size());
        g.links.push_back({a, b, bps, spec.link_delay_ns, spec.queue_bytes, enabled});
        g.adjacency[a].push_back(id);
        g.adjacency[b].push_back(id);
    };

    for (int h = 0; h < hosts; ++h)
        add_link(g.tor_of_host(h), g.host_node(h), spec.host_bps, true);

    for (int p = 0; p < spec.pods; ++p)
        for (int a = 0; a < spec.aggs_per_pod; ++a)
            for (int e = 0; e < spec.edges_per_pod; ++e)
                add_link(g.agg_node(p * spec.aggs_per_pod + a),
                         g.edge_node(p * spec.edges_per_pod + e),
                         spec.fabric_bps, true);

    // Core c serves aggregate column c / (num_cores / aggs_per_pod).
    const int cores_per_agg = spec.num_cores / spec.aggs_per_pod;
    for (int c = 0; c < spec.num_cores; ++c) {
        bool up = spec.disabled_cores.count(c) == 0;
        int column = c / cores_per_agg;
        for (int p = 0; p < spec.pods; ++p)
            add_link(g.core_node(c), g.agg_node(p * spec.aggs_per_pod + column),
                     spec.fabric_bps, up);
    }
    return g;
}

std::vector<std::vector<int>> disjoint_paths(const NetworkGraph& g,
                                             int src_tor_node,
                                             int dst_tor_node) {
    auto require_tor = [&](int n) {
        if (n < 0 || n >= static_cast<int>(g.nodes.size()) ||
            g.nodes[n].kind != NodeKind::EdgeTor)
            throw std::invalid_argument("disjoint_paths: not an edge ToR node");
    };
    require_tor(src_tor_node);
    require_tor(dst_tor_node);
    if (src_tor_node == dst_tor_node) return {{}};

    auto enabled_peers = [&](int node, NodeKind want) {
        std::vector<int> out;
        for (int lid : g.adjacency[node]) {
            const Link& l = g.links[lid];
            if (!l.enabled) continue;
            int p = g.peer(lid, node);
            if (g.nodes[p].kind == want) out.push_back(p);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    auto connected = [&](int a, int b) {
        for (int lid : g.adjacency[a]) {
            const Link& l = g.links[lid];
            if (l.enabled && g.peer(lid, a) == b) return true;
        }
        return false;
    };

    std::vector<std::vector<int>> paths;
    const int dst_pod = g.nodes[dst_tor_node].pod;
    for (int agg : enabled_peers(src_tor_node, NodeKind::Aggregate)) {
        if (g.nodes[agg].pod == dst_pod && connected(agg, dst_tor_node)) {
            paths.push_back({agg});
            continue;
        }
        for (int core : enabled_peers(agg, NodeKind::Core))
            for (int agg2 : enabled_peers(core, NodeKind::Aggregate))
                if (g.nodes[agg2].pod == dst_pod && connected(agg2, dst_tor_node))
                    paths.push_back({agg, core, agg2});
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

std::int64_t bisection_bandwidth_bps(const NetworkGraph& g) {
    // One unit of core-tier capacity per core column that still reaches
    // both halves of the pod set.
    std::int64_t total = 0;
    const int half = g.spec.pods / 2;
    for (int c = 0; c < g.spec.num_cores; ++c) {
        int core = g.core_node(c);
        bool left = false, right = false;
        std::int64_t cap = 0;
        for (int lid : g.adjacency[core]) {
            const Link& l = g.links[lid];
            if (!l.enabled) continue;
            int pod = g.nodes[g.peer(lid, core)].pod;
            (pod < half ? left : right) = true;
            cap = l.capacity_bps;
        }
        if (left && right) total += cap;
    }
    return total;
}

std::string dump_edge_list(const NetworkGraph& g) {
    std::ostringstream os;
    for (const Link& l : g.links)
        os << l.a << ' ' << l.b << ' ' << l.capacity_bps << ' ' << l.delay_ns
           << ' ' << (l.enabled ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace fdsim
