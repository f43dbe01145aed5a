#include "fdsim/flowdyn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fdsim/random.hpp"

namespace fdsim {

TimeNs StepFunction::detect_ns() const {
    return std::llround(threshold * static_cast<double>(step_ns));
}

TimeNs quantize_gap(TimeNs delta_ns, const StepFunction& f) {
    if (delta_ns < 0) throw std::invalid_argument("delta must be >= 0");
    if (f.step_ns <= 0) throw std::invalid_argument("step must be positive");
    if (!(f.threshold > 0.0) || f.threshold > 1.0)
        throw std::invalid_argument("threshold must be in (0,1]");
    const TimeNs detect = f.detect_ns();
    return f.step_ns * (delta_ns / detect + 1);
}

std::uint64_t probe_path_hash(const ProbeHeader& p) {
    std::uint64_t h = fnv1a64_u32(p.origin_tor, 0xcbf29ce484222325ULL);
    for (int i = 0; i < p.hop_count; ++i) h = fnv1a64_u32(p.hops[i], h);
    return h;
}

void apply_probe(RemoteTables& t, std::uint32_t origin, TimeNs owd,
                 std::uint64_t path_hash, std::uint32_t probe_seq, TimeNs now) {
    const PathDelayEntry fresh{owd, path_hash, now, probe_seq};

    auto mi = t.min_remote.find(origin);
    if (mi == t.min_remote.end())
        mi = t.min_remote.emplace(origin, fresh).first;
    else if (mi->second.path_hash == path_hash)
        mi->second = fresh;  // forced refresh: same path, new measurement
    else if (owd < mi->second.owd)
        mi->second = fresh;

    auto ma = t.max_remote.find(origin);
    if (ma == t.max_remote.end())
        ma = t.max_remote.emplace(origin, fresh).first;
    else if (ma->second.path_hash == path_hash)
        ma->second = fresh;
    else if (owd > ma->second.owd)
        ma->second = fresh;

    // A forced refresh may leave min above max; swap restores order.
    if (mi->second.owd > ma->second.owd) std::swap(mi->second, ma->second);
}

std::optional<TimeNs> compute_delta(const RemoteTables& t, std::uint32_t origin) {
    auto mi = t.min_remote.find(origin);
    auto ma = t.max_remote.find(origin);
    if (mi == t.min_remote.end() || ma == t.max_remote.end()) return std::nullopt;
    return ma->second.owd - mi->second.owd;
}

bool store_gap(GapTable& table, const GapHeader& h, TimeNs now) {
    auto it = table.find(h.target_tor);
    if (it != table.end() && h.probe_seq < it->second.probe_seq) return false;
    table[h.target_tor] = GapEntry{us(h.gap_us), h.probe_seq, now};
    return true;
}

TimeNs current_gap(const GapTable& table, std::uint32_t dst_tor, TimeNs now,
                   TimeNs staleness, TimeNs fallback_gap) {
    auto it = table.find(dst_tor);
    if (it == table.end() || now - it->second.updated > staleness)
        return fallback_gap;
    return it->second.gap;
}

void TorFlowDyn::on_probe(const ProbeHeader& p, TimeNs now) {
    // Timestamps travel as 48 bits; difference in the same modulus.
    const std::uint64_t mask = 0xFFFFFFFFFFFFULL;
    const auto owd = static_cast<TimeNs>(
        (static_cast<std::uint64_t>(now) - static_cast<std::uint64_t>(p.timestamp)) & mask);
    apply_probe(tables_, p.origin_tor, owd, probe_path_hash(p), p.seq, now);
}

std::optional<GapHeader> TorFlowDyn::make_gap_header(std::uint32_t origin_tor,
                                                     TimeNs now) const {
    auto mi = tables_.min_remote.find(origin_tor);
    auto ma = tables_.max_remote.find(origin_tor);
    if (mi == tables_.min_remote.end() || ma == tables_.max_remote.end())
        return std::nullopt;
    if (now - mi->second.arrival_time > staleness_ ||
        now - ma->second.arrival_time > staleness_)
        return std::nullopt;

    const TimeNs gap = quantize_gap(ma->second.owd - mi->second.owd, step_);
    GapHeader h;
    h.target_tor = self_;
    h.gap_us = static_cast<std::uint16_t>(
        std::min<TimeNs>(65535, std::max<TimeNs>(1, (gap + kNsPerUs - 1) / kNsPerUs)));
    h.probe_seq = std::max(mi->second.probe_seq, ma->second.probe_seq);
    return h;
}

std::string TorFlowDyn::dump_tables() const {
    std::map<std::uint32_t, const PathDelayEntry*> mins, maxs;
    for (const auto& [k, v] : tables_.min_remote) mins[k] = &v;
    for (const auto& [k, v] : tables_.max_remote) maxs[k] = &v;
    std::ostringstream os;
    os << "tor " << self_ << " remote tables\n";
    os << "origin     min_owd_us    max_owd_us    delta_us   min_seq   max_seq\n";
    for (const auto& [origin, mn] : mins) {
        const PathDelayEntry* mx = maxs.count(origin) ? maxs.at(origin) : nullptr;
        os << origin << "  " << to_us(mn->owd) << "  "
           << (mx ? to_us(mx->owd) : -1.0) << "  "
           << (mx ? to_us(mx->owd - mn->owd) : -1.0) << "  " << mn->probe_seq
           << "  " << (mx ? mx->probe_seq : 0) << "\n";
    }
    return os.str();
}

std::int64_t remote_table_bytes(int num_tors) {
    // 3B origin key, 6B delay, 4B path tag per entry.
    return std::int64_t{13} * num_tors;
}

std::int64_t local_table_bytes(int num_tors) {
    // 3B target key, 2B gap, 4B probe seq, 1B flags per entry.
    return std::int64_t{10} * num_tors;
}

}  // namespace fdsim
