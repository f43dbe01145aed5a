#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fdsim/time.hpp"

namespace fdsim {

inline constexpr int kMaxProbeHops = 8;
inline constexpr std::uint32_t kMaxSwitchId = (1u << 24) - 1;

// On the wire: 3B origin switch id, 6B timestamp (ns, truncated to 48
// bits), 3B per recorded hop, and one trailing utilization byte when the
// balancing scheme wants it. 9B when freshly emitted, 18B after the
// usual aggregate-core-aggregate traversal, 19B with the util byte.
// The sequence number is bookkeeping on the simulator side only.
struct ProbeHeader {
    std::uint32_t origin_tor = 0;
    TimeNs timestamp = 0;
    std::uint32_t seq = 0;  // not serialized
    std::uint8_t hop_count = 0;
    std::array<std::uint32_t, kMaxProbeHops> hops{};
    bool has_util = false;
    std::uint8_t util = 0;

    void add_hop(std::uint32_t switch_id);
    bool visited(std::uint32_t switch_id) const;
    std::size_t wire_size() const {
        return 3 + 6 + 3 * std::size_t{hop_count} + (has_util ? 1 : 0);
    }
};

// Piggybacked on any data or ACK packet: 3B target ToR id, 2B gap in
// microseconds, 4B probe sequence number.
struct GapHeader {
    std::uint32_t target_tor = 0;
    std::uint16_t gap_us = 0;
    std::uint32_t probe_seq = 0;
};

inline constexpr std::size_t kGapHeaderBytes = 9;

// Minimum frame on the wire including Ethernet, IP and any appended
// headers; shorter frames are padded.
inline constexpr std::int64_t kMinWireBytes = 64;
// Ethernet + IP + transport framing charged to every simulated packet.
inline constexpr std::int64_t kBaseHeaderBytes = 58;

std::vector<std::uint8_t> encode_probe(const ProbeHeader& p);
// Length determines the hop count; length % 3 == 1 marks a util byte.
// Throws std::invalid_argument on impossible lengths.
ProbeHeader decode_probe(const std::uint8_t* data, std::size_t len);
inline ProbeHeader decode_probe(const std::vector<std::uint8_t>& v) {
    return decode_probe(v.data(), v.size());
}

std::vector<std::uint8_t> encode_gap(const GapHeader& h);
GapHeader decode_gap(const std::uint8_t* data, std::size_t len);
inline GapHeader decode_gap(const std::vector<std::uint8_t>& v) {
    return decode_gap(v.data(), v.size());
}

}  // namespace fdsim
