#include "fdsim/dataplane.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdsim/random.hpp"

namespace fdsim {

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Ecmp: return "ecmp";
        case Scheme::LetFlow: return "letflow";
        case Scheme::Hula: return "hula";
    }
    return "?";
}

std::optional<Scheme> scheme_from_string(const std::string& s) {
    if (s == "ecmp") return Scheme::Ecmp;
    if (s == "letflow") return Scheme::LetFlow;
    if (s == "hula") return Scheme::Hula;
    return std::nullopt;
}

std::uint64_t tuple_hash(const FiveTuple& t, std::uint64_t salt) {
    std::uint8_t b[13] = {
        static_cast<std::uint8_t>(t.src_addr >> 24), static_cast<std::uint8_t>(t.src_addr >> 16),
        static_cast<std::uint8_t>(t.src_addr >> 8),  static_cast<std::uint8_t>(t.src_addr),
        static_cast<std::uint8_t>(t.dst_addr >> 24), static_cast<std::uint8_t>(t.dst_addr >> 16),
        static_cast<std::uint8_t>(t.dst_addr >> 8),  static_cast<std::uint8_t>(t.dst_addr),
        static_cast<std::uint8_t>(t.src_port >> 8),  static_cast<std::uint8_t>(t.src_port),
        static_cast<std::uint8_t>(t.dst_port >> 8),  static_cast<std::uint8_t>(t.dst_port),
        t.proto};
    return splitmix64(fnv1a64(b, sizeof b) ^ salt);
}

int ecmp_pick(const FiveTuple& t, std::uint64_t switch_salt,
              const std::vector<int>& candidates) {
    if (candidates.empty()) throw std::logic_error("ecmp_pick: no candidates");
    return candidates[tuple_hash(t, switch_salt) % candidates.size()];
}

FlowletTable::FlowletTable(Mode m, std::size_t slots) : mode_(m) {
    if (m == Mode::Hashed) {
        if (slots == 0) throw std::invalid_argument("flowlet table needs slots");
        slots_.assign(slots, {});
    }
}

std::optional<int> FlowletTable::classify(std::uint64_t key, TimeNs now,
                                          TimeNs gap) {
    Slot* s = nullptr;
    if (mode_ == Mode::Exact) {
        auto it = exact_.find(key);
        if (it != exact_.end()) s = &it->second;
    } else {
        Slot& cand = slots_[key % slots_.size()];
        if (cand.used && cand.key == key) s = &cand;
    }
    if (!s) return std::nullopt;
    if (now - s->last_seen > gap) return std::nullopt;  // expired, decide anew
    s->last_seen = now;
    return s->port;
}

void FlowletTable::commit(std::uint64_t key, int port, TimeNs now) {
    if (mode_ == Mode::Exact) {
        exact_[key] = Slot{key, now, port, true};
    } else {
        slots_[key % slots_.size()] = Slot{key, now, port, true};
    }
}

std::size_t FlowletTable::entries() const {
    if (mode_ == Mode::Exact) return exact_.size();
    std::size_t n = 0;
    for (const Slot& s : slots_) n += s.used ? 1 : 0;
    return n;
}

void HulaTable::update(std::uint32_t origin_tor, int ingress_port,
                       std::uint8_t util, TimeNs now) {
    auto it = best_.find(origin_tor);
    if (it == best_.end()) {
        best_.emplace(origin_tor, Entry{ingress_port, util, now});
        return;
    }
    Entry& e = it->second;
    if (now - e.updated >= staleness_ || util < e.util || ingress_port == e.port) {
        e = Entry{ingress_port, util, now};
    }
}

std::optional<int> HulaTable::best_port(std::uint32_t origin_tor,
                                        TimeNs now) const {
    auto it = best_.find(origin_tor);
    if (it == best_.end() || now - it->second.updated >= staleness_)
        return std::nullopt;
    return it->second.port;
}

std::uint8_t quantize_util(double utilization) {
    double v = std::clamp(utilization, 0.0, 1.0) * 255.0;
    return static_cast<std::uint8_t>(std::llround(v));
}

int SwitchInfo::port_to(int peer_node) const {
    for (std::size_t i = 0; i < ports.size(); ++i)
        if (ports[i].peer == peer_node) return static_cast<int>(i);
    return -1;
}

SwitchInfo make_switch_info(const NetworkGraph& g, int node) {
    const NodeId& id = g.nodes[node];
    if (id.kind == NodeKind::Host)
        throw std::invalid_argument("make_switch_info: hosts have no switch state");

    SwitchInfo sw;
    sw.node = node;
    sw.kind = id.kind;
    sw.pod = id.pod;

    std::vector<int> lids = g.adjacency[node];
    std::sort(lids.begin(), lids.end(), [&](int x, int y) {
        return g.peer(x, node) < g.peer(y, node);
    });
    for (int lid : lids) {
        const Link& l = g.links[lid];
        int p = g.peer(lid, node);
        sw.ports.push_back({lid, p, g.nodes[p].kind, g.nodes[p].pod, l.enabled});
    }

    auto tier = [](NodeKind k) {
        switch (k) {
            case NodeKind::Host: return 0;
            case NodeKind::EdgeTor: return 1;
            case NodeKind::Aggregate: return 2;
            case NodeKind::Core: return 3;
        }
        return -1;
    };
    for (std::size_t i = 0; i < sw.ports.size(); ++i) {
        const SwitchPort& p = sw.ports[i];
        if (!p.enabled) continue;
        if (p.peer_kind == NodeKind::Host)
            sw.host_ports.push_back(static_cast<int>(i));
        else if (tier(p.peer_kind) > tier(sw.kind))
            sw.up_ports.push_back(static_cast<int>(i));
        else
            sw.down_ports.push_back(static_cast<int>(i));
    }
    return sw;
}

ProbeRoute route_probe(const SwitchInfo& sw, std::uint32_t origin_tor_node,
                       int origin_pod, int ingress_port) {
    ProbeRoute r;
    switch (sw.kind) {
        case NodeKind::EdgeTor:
            r.action = sw.node == static_cast<int>(origin_tor_node)
                           ? ProbeAction::ReturnedToOrigin
                           : ProbeAction::Consume;
            return r;
        case NodeKind::Aggregate:
            r.action = ProbeAction::Forward;
            r.append_self = true;
            if (sw.pod == origin_pod) {
                for (int p : sw.down_ports)
                    if (p != ingress_port) r.egress_ports.push_back(p);
                for (int p : sw.up_ports) r.egress_ports.push_back(p);
            } else {
                // Down only; sending back up would revisit a core.
                r.egress_ports = sw.down_ports;
            }
            return r;
        case NodeKind::Core:
            r.action = ProbeAction::Forward;
            r.append_self = true;
            for (int p : sw.down_ports)
                if (sw.ports[p].peer_pod != origin_pod) r.egress_ports.push_back(p);
            return r;
        case NodeKind::Host:
            break;
    }
    throw std::logic_error("probe delivered to a host");
}

const std::vector<int>& emit_ports(const SwitchInfo& sw) {
    if (sw.kind != NodeKind::EdgeTor)
        throw std::logic_error("only edge ToRs emit probes");
    return sw.up_ports;
}

}  // namespace fdsim
