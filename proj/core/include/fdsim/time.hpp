#pragma once

#include <cstdint>
#include <limits>

namespace fdsim {

// Simulated time: integer nanoseconds since run start. Integer ns keeps
// microsecond-scale protocol arithmetic exact and comparisons total.
using TimeNs = std::int64_t;

inline constexpr TimeNs kNsPerUs = 1'000;
inline constexpr TimeNs kNsPerMs = 1'000'000;
inline constexpr TimeNs kNsPerSec = 1'000'000'000;

// Sentinel for "never" (disabled timers, infinite flowlet gap).
inline constexpr TimeNs kTimeInf = std::numeric_limits<TimeNs>::max();

constexpr TimeNs us(std::int64_t v) { return v * kNsPerUs; }
constexpr TimeNs ms(std::int64_t v) { return v * kNsPerMs; }

constexpr double to_us(TimeNs t) { return static_cast<double>(t) / 1e3; }
constexpr double to_ms(TimeNs t) { return static_cast<double>(t) / 1e6; }
constexpr double to_sec(TimeNs t) { return static_cast<double>(t) / 1e9; }

// Serialization delay of `bytes` on a `bps` link, truncated to whole ns.
// 1500B at 10G is 1200ns exactly; truncation error is <1ns per packet.
constexpr TimeNs tx_time_ns(std::int64_t bytes, std::int64_t bps) {
    return bytes * 8 * kNsPerSec / bps;
}

}  // namespace fdsim
