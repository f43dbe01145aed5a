#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "fdsim/codec.hpp"
#include "fdsim/time.hpp"

namespace fdsim {

// One remembered probe observation. path_hash identifies the up-down
// route the probe took; probe_seq and arrival_time are bookkeeping used
// for gap header sequencing and staleness checks.
struct PathDelayEntry {
    TimeNs owd = 0;
    std::uint64_t path_hash = 0;
    TimeNs arrival_time = 0;
    std::uint32_t probe_seq = 0;
};

// Per destination (probe origin) ToR: cheapest and most expensive path
// seen so far. The spread between them is the flowlet gap floor.
struct RemoteTables {
    std::unordered_map<std::uint32_t, PathDelayEntry> min_remote;
    std::unordered_map<std::uint32_t, PathDelayEntry> max_remote;
};

// Step quantizer configuration. detect_ns is the detection threshold per
// step: a quantized gap g guarantees threshold * g > delta.
struct StepFunction {
    TimeNs step_ns = us(100);
    double threshold = 0.70;
    TimeNs detect_ns() const;
};

// Smallest multiple of step_ns strictly safe for the measured spread:
// step * (floor(delta / (threshold * step)) + 1).
TimeNs quantize_gap(TimeNs delta_ns, const StepFunction& f);

// Hash of the origin id and the ordered hop ids. Probe copies that took
// the same route hash equal.
std::uint64_t probe_path_hash(const ProbeHeader& p);

// Applies the table update rules for one received probe: forced refresh
// when the path matches the stored entry, otherwise min/max replacement,
// then ordering normalization. Touched entries get arrival_time = now.
void apply_probe(RemoteTables& t, std::uint32_t origin, TimeNs owd,
                 std::uint64_t path_hash, std::uint32_t probe_seq, TimeNs now);

// max - min spread for the given origin, if both entries exist.
std::optional<TimeNs> compute_delta(const RemoteTables& t, std::uint32_t origin);

// Gap values learned from piggybacked headers, keyed by target ToR.
struct GapEntry {
    TimeNs gap = 0;
    std::uint32_t probe_seq = 0;
    TimeNs updated = 0;
};
using GapTable = std::unordered_map<std::uint32_t, GapEntry>;

// Accepts the header unless a newer probe_seq is already stored.
// Returns whether the table changed.
bool store_gap(GapTable& table, const GapHeader& h, TimeNs now);

// Gap to use for flows toward dst_tor: the stored value while fresh,
// otherwise the static fallback.
TimeNs current_gap(const GapTable& table, std::uint32_t dst_tor, TimeNs now,
                   TimeNs staleness, TimeNs fallback_gap);

// Measuring-side state of one edge ToR.
class TorFlowDyn {
  public:
    TorFlowDyn(std::uint32_t self_id, StepFunction step, TimeNs staleness)
        : self_(self_id), step_(step), staleness_(staleness) {}

    std::uint32_t self_id() const { return self_; }
    std::uint32_t next_probe_seq() { return probe_seq_++; }

    void on_probe(const ProbeHeader& p, TimeNs now);

    // Header advertising the safe gap toward this ToR, for piggybacking at
    // the origin ToR of the probes. Absent while either contributing
    // entry is missing or stale.
    std::optional<GapHeader> make_gap_header(std::uint32_t origin_tor,
                                             TimeNs now) const;

    const RemoteTables& tables() const { return tables_; }
    RemoteTables& tables() { return tables_; }

    std::string dump_tables() const;

  private:
    std::uint32_t self_;
    StepFunction step_;
    TimeNs staleness_;
    std::uint32_t probe_seq_ = 0;
    RemoteTables tables_;
};

// Switch memory cost of the protocol state, in bytes: 13 per tracked ToR
// per remote table, 10 per ToR for the local gap table.
std::int64_t remote_table_bytes(int num_tors);
std::int64_t local_table_bytes(int num_tors);

}  // namespace fdsim
