#include "fdsim/codec.hpp"

#include <stdexcept>

namespace fdsim {

void ProbeHeader::add_hop(std::uint32_t switch_id) {
    if (hop_count >= kMaxProbeHops)
        throw std::logic_error("probe hop list full");
    if (switch_id > kMaxSwitchId)
        throw std::invalid_argument("switch id exceeds 24 bits");
    hops[hop_count++] = switch_id;
}

bool ProbeHeader::visited(std::uint32_t switch_id) const {
    for (int i = 0; i < hop_count; ++i)
        if (hops[i] == switch_id) return true;
    return false;
}

static void put24(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> encode_probe(const ProbeHeader& p) {
    if (p.origin_tor > kMaxSwitchId)
        throw std::invalid_argument("origin id exceeds 24 bits");
    std::vector<std::uint8_t> out;
    out.reserve(p.wire_size());
    put24(out, p.origin_tor);
    const auto ts = static_cast<std::uint64_t>(p.timestamp) & 0xFFFFFFFFFFFFULL;
    for (int shift = 40; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(ts >> shift));
    for (int i = 0; i < p.hop_count; ++i) put24(out, p.hops[i]);
    if (p.has_util) out.push_back(p.util);
    return out;
}

static std::uint32_t get24(const std::uint8_t* d) {
    return (std::uint32_t{d[0]} << 16) | (std::uint32_t{d[1]} << 8) | d[2];
}

ProbeHeader decode_probe(const std::uint8_t* data, std::size_t len) {
    if (len < 9) throw std::invalid_argument("probe shorter than 9 bytes");
    const bool has_util = len % 3 == 1;
    const std::size_t body = len - (has_util ? 1 : 0);
    if (body % 3 != 0) throw std::invalid_argument("probe length not 9+3n(+1)");
    const std::size_t hops = (body - 9) / 3;
    if (hops > kMaxProbeHops) throw std::invalid_argument("too many probe hops");

    ProbeHeader p;
    p.origin_tor = get24(data);
    std::uint64_t ts = 0;
    for (int i = 0; i < 6; ++i) ts = (ts << 8) | data[3 + i];
    p.timestamp = static_cast<TimeNs>(ts);
    p.has_util = has_util;
    for (std::size_t i = 0; i < hops; ++i)
        p.add_hop(get24(data + 9 + 3 * i));
    if (has_util) p.util = data[len - 1];
    return p;
}

std::vector<std::uint8_t> encode_gap(const GapHeader& h) {
    if (h.target_tor > kMaxSwitchId)
        throw std::invalid_argument("target id exceeds 24 bits");
    std::vector<std::uint8_t> out;
    out.reserve(kGapHeaderBytes);
    put24(out, h.target_tor);
    out.push_back(static_cast<std::uint8_t>(h.gap_us >> 8));
    out.push_back(static_cast<std::uint8_t>(h.gap_us));
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(h.probe_seq >> shift));
    return out;
}

GapHeader decode_gap(const std::uint8_t* data, std::size_t len) {
    if (len != kGapHeaderBytes)
        throw std::invalid_argument("gap header must be 9 bytes");
    GapHeader h;
    h.target_tor = get24(data);
    h.gap_us = static_cast<std::uint16_t>((std::uint16_t{data[3]} << 8) | data[4]);
    h.probe_seq = (std::uint32_t{data[5]} << 24) | (std::uint32_t{data[6]} << 16) |
                  (std::uint32_t{data[7]} << 8) | data[8];
    return h;
}

}  // namespace fdsim
