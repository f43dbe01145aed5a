#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdsim/time.hpp"

namespace fdsim {

inline constexpr std::int64_t kMiceMaxBytes = 100'000;        // exclusive
inline constexpr std::int64_t kElephantMinBytes = 10'000'000; // exclusive

struct FlowRecord {
    std::uint32_t flow = 0;
    int src_host = -1;
    int dst_host = -1;
    std::int64_t bytes = 0;
    TimeNs start = 0;
    TimeNs finish = -1;  // -1 while incomplete
    bool completed = false;
    std::int64_t reorder_events = 0;
    std::int64_t retransmits = 0;
    std::int64_t timeouts = 0;

    TimeNs fct() const { return completed ? finish - start : -1; }
};

struct FctStats {
    std::int64_t count = 0;
    double mean_us = 0;
    double median_us = 0;
    double p99_us = 0;
};

struct RunStats {
    FctStats all;
    FctStats mice;       // bytes < 100 kB
    FctStats elephants;  // bytes > 10 MB
    std::int64_t flows_total = 0;
    std::int64_t flows_completed = 0;
    std::int64_t reorder_events = 0;
    std::int64_t retransmits = 0;
    std::int64_t timeouts = 0;
};

// Nearest-rank percentile on a sorted copy; q in [0,1].
double percentile(std::vector<double> values, double q);

// Stats over completed flows only. Classes with no completions keep
// count 0 and NaN aggregates rather than inventing zeros.
RunStats aggregate(const std::vector<FlowRecord>& records);

// One utilization observation: bytes sent by a directed port during one
// sampling window.
struct PortSample {
    int node = -1;
    int port = -1;
    TimeNs window_start = 0;
    std::int64_t bytes = 0;
};

struct PortUsage {
    int node = -1;
    int port = -1;
    std::int64_t max_window_bytes = 0;
    std::int64_t total_bytes = 0;
    std::int64_t windows = 0;
};

// Collapses samples per (node, port), preserving first-seen order.
std::vector<PortUsage> utilization_matrix(const std::vector<PortSample>& samples);

// Coefficient of variation (stddev / mean) of per-port mean utilization;
// nullopt when fewer than two ports or zero mean.
std::optional<double> utilization_cov(const std::vector<double>& per_port_util);

std::string format_fixed(double v, int decimals);

}  // namespace fdsim
