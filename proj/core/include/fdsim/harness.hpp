#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fdsim/config.hpp"
#include "fdsim/metrics.hpp"
#include "fdsim/simulation.hpp"
#include "fdsim/workload.hpp"

namespace fdsim {

struct RunOutputs {
    RunConfig config;
    RunStats stats;  // flows starting after warm-up
    SimCounters counters;
    std::int64_t flows_simulated = 0;
    std::optional<double> core_util_cov;
    std::uint64_t events_processed = 0;
    double wall_seconds = 0;
};

// Data directory for named workloads: $FDSIM_DATA_DIR, else ./data.
std::string default_data_dir();

// Builds the topology, generates arrivals, runs to cfg.duration and
// aggregates warm-up-filtered stats. Throws on invalid config.
RunOutputs run_simulation(const RunConfig& cfg);

// Clients live in the lower half of the pods, servers in the upper half.
std::vector<int> client_hosts(const NetworkGraph& g);
std::vector<int> server_hosts(const NetworkGraph& g);

std::string csv_header();
std::string csv_row(const RunOutputs& r);
std::string json_report(const RunOutputs& r);

// Appends the row, writing the header first when the file is new or
// empty. Creates parent directories.
void append_csv(const std::string& path, const std::string& row);
void write_text_file(const std::string& path, const std::string& text);

// JSON to <out_dir>/<run_name>.json, row to <out_dir>/results.csv.
void write_run_outputs(const RunOutputs& r);

struct SweepSpec {
    RunConfig base;
    std::vector<Scheme> schemes;
    std::vector<double> loads;
    std::vector<bool> flowdyn_modes = {false, true};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    bool write_outputs = false;
};

std::vector<RunOutputs> run_sweep(const SweepSpec& spec);

// Per (scheme, load, workload, topology): seed-mean FCTs for the static
// and dynamic runs side by side with their ratio.
std::string sweep_summary_csv(const std::vector<RunOutputs>& rows);

}  // namespace fdsim
