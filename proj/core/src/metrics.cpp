#include "fdsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace fdsim {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (q < 0 || q > 1) throw std::invalid_argument("percentile q in [0,1]");
    std::sort(values.begin(), values.end());
    if (q == 0) return values.front();
    auto rank = static_cast<std::size_t>(std::ceil(q * values.size()));
    rank = std::min(std::max<std::size_t>(rank, 1), values.size());
    return values[rank - 1];
}

static FctStats fct_stats(const std::vector<double>& fcts_us) {
    FctStats s;
    s.count = static_cast<std::int64_t>(fcts_us.size());
    if (fcts_us.empty()) {
        s.mean_us = s.median_us = s.p99_us =
            std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double sum = 0;
    for (double v : fcts_us) sum += v;
    s.mean_us = sum / fcts_us.size();
    s.median_us = percentile(fcts_us, 0.5);
    s.p99_us = percentile(fcts_us, 0.99);
    return s;
}

RunStats aggregate(const std::vector<FlowRecord>& records) {
    RunStats r;
    std::vector<double> all, mice, elephants;
    for (const FlowRecord& f : records) {
        ++r.flows_total;
        r.reorder_events += f.reorder_events;
        r.retransmits += f.retransmits;
        r.timeouts += f.timeouts;
        if (!f.completed) continue;
        ++r.flows_completed;
        const double us = to_us(f.fct());
        all.push_back(us);
        if (f.bytes < kMiceMaxBytes) mice.push_back(us);
        if (f.bytes > kElephantMinBytes) elephants.push_back(us);
    }
    r.all = fct_stats(all);
    r.mice = fct_stats(mice);
    r.elephants = fct_stats(elephants);
    return r;
}

std::vector<PortUsage> utilization_matrix(const std::vector<PortSample>& samples) {
    std::vector<PortUsage> out;
    std::map<std::pair<int, int>, std::size_t> index;
    for (const PortSample& s : samples) {
        auto key = std::make_pair(s.node, s.port);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            out.push_back({s.node, s.port, 0, 0, 0});
        }
        PortUsage& u = out[it->second];
        u.max_window_bytes = std::max(u.max_window_bytes, s.bytes);
        u.total_bytes += s.bytes;
        ++u.windows;
    }
    return out;
}

std::optional<double> utilization_cov(const std::vector<double>& per_port_util) {
    if (per_port_util.size() < 2) return std::nullopt;
    double mean = 0;
    for (double v : per_port_util) mean += v;
    mean /= per_port_util.size();
    if (mean == 0) return std::nullopt;
    double var = 0;
    for (double v : per_port_util) var += (v - mean) * (v - mean);
    var /= per_port_util.size();
    return std::sqrt(var) / mean;
}

std::string format_fixed(double v, int decimals) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace fdsim
