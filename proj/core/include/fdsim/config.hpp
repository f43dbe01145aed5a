#pragma once

#include <cstdint>
#include <string>

#include "fdsim/dataplane.hpp"
#include "fdsim/flowdyn.hpp"
#include "fdsim/topology.hpp"
#include "fdsim/transport.hpp"

namespace fdsim {

// Full description of one run. Everything a run needs is in here plus
// the CDF file it points at; two runs with equal configs produce
// byte-identical outputs.
struct RunConfig {
    FatTreeSpec topo;

    Scheme scheme = Scheme::LetFlow;
    bool flowdyn = true;
    TimeNs static_gap = us(800);   // fallback and baseline flowlet gap
    TimeNs probe_interval = us(100);
    StepFunction step{us(100), 0.70};
    TimeNs staleness = ms(1);      // freshness horizon for learned state

    TcpParams tcp;

    std::string workload = "web-search";  // a name or a csv path
    double load = 0.5;
    std::uint64_t seed = 1;
    TimeNs duration = ms(200);
    TimeNs warmup = ms(20);

    FlowletTable::Mode flowlet_mode = FlowletTable::Mode::Exact;
    std::size_t flowlet_slots = 4096;

    bool collect_port_samples = false;
    std::string trace_file;
    std::string out_dir = "out";
    std::string run_name;  // derived from the knobs when empty

    std::string topology_label() const {
        return topo.disabled_cores.empty() ? "symmetric" : "asymmetric";
    }
    std::string derived_run_name() const;
    int connections_per_client() const;
};

// key = value lines, # comments. Unknown or malformed keys throw
// std::runtime_error naming the key. Values use the same spellings that
// dump_config writes, so dump -> parse round-trips.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig parse_config_file(const std::string& path, RunConfig base = {});
void apply_config_kv(RunConfig& c, const std::string& key,
                     const std::string& value);
std::string dump_config(const RunConfig& c);

// Throws std::invalid_argument naming the failing field.
void validate_config(const RunConfig& c);

// Built-in starting points: symmetric-websearch-50, symmetric-datamining-10,
// asymmetric-websearch-90.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Resolves a workload name to a CDF path under data_dir; pass-through
// when `workload` already names a readable file.
std::string resolve_cdf_path(const std::string& workload,
                             const std::string& data_dir);

}  // namespace fdsim
