#include "fdsim/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace fdsim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_data_dir() {
    if (const char* env = std::getenv("FDSIM_DATA_DIR")) return env;
    return "data";
}

std::vector<int> client_hosts(const NetworkGraph& g) {
    std::vector<int> out;
    const int half = g.spec.pods / 2;
    for (int h = 0; h < g.num_hosts(); ++h)
        if (g.nodes[h].pod < half) out.push_back(h);
    return out;
}

std::vector<int> server_hosts(const NetworkGraph& g) {
    std::vector<int> out;
    const int half = g.spec.pods / 2;
    for (int h = 0; h < g.num_hosts(); ++h)
        if (g.nodes[h].pod >= half) out.push_back(h);
    return out;
}

RunOutputs run_simulation(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    validate_config(cfg);
    if (cfg.run_name.empty()) cfg.run_name = cfg.derived_run_name();

    const NetworkGraph graph = build_fat_tree(cfg.topo);
    const SizeCdf cdf =
        SizeCdf::load_csv(resolve_cdf_path(cfg.workload, default_data_dir()));

    LoadSpec load;
    load.load_fraction = cfg.load;
    load.connections_per_client = cfg.connections_per_client();
    load.client_hosts = client_hosts(graph);
    load.server_hosts = server_hosts(graph);
    load.seed = cfg.seed;
    if (load.client_hosts.empty() || load.server_hosts.empty())
        throw std::invalid_argument(
            "config field 'topo.pods': need at least 2 pods for traffic");

    const auto arrivals =
        generate_arrivals(load, cdf, cfg.duration, cfg.topo.host_bps);

    Simulation sim(graph, cfg);
    sim.add_arrivals(arrivals);

    std::ofstream trace;
    if (!cfg.trace_file.empty()) {
        trace.open(cfg.trace_file);
        if (!trace)
            throw std::runtime_error("cannot open trace file: " + cfg.trace_file);
        sim.engine().set_tracer([&trace](const Event& ev) {
            trace << ev.time << ' ' << to_string(ev.kind) << ' ' << ev.node
                  << ' ' << ev.arg0 << ' ' << ev.arg1 << '\n';
        });
    }

    const auto t0 = std::chrono::steady_clock::now();
    sim.run_until(cfg.duration);
    const auto t1 = std::chrono::steady_clock::now();

    RunOutputs out;
    out.config = cfg;
    auto records = sim.flow_records();
    out.flows_simulated = static_cast<std::int64_t>(records.size());
    std::erase_if(records,
                  [&](const FlowRecord& r) { return r.start < cfg.warmup; });
    out.stats = aggregate(records);
    out.counters = sim.counters();
    out.events_processed = sim.engine().processed();
    out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    // Reported, never asserted: spread of mean utilization across the
    // core-facing directed links.
    std::vector<double> core_utils;
    const auto usage = sim.link_usage();
    for (std::size_t i = 0; i < usage.size(); ++i) {
        const auto& u = usage[i];
        const bool core_side =
            graph.nodes[u.from].kind == NodeKind::Core ||
            graph.nodes[u.to].kind == NodeKind::Core;
        if (!core_side) continue;
        const Link& l = graph.links[i / 2];
        if (!l.enabled) continue;
        core_utils.push_back(static_cast<double>(u.total_bytes) * 8.0 /
                             (static_cast<double>(l.capacity_bps) *
                              to_sec(cfg.duration)));
    }
    out.core_util_cov = utilization_cov(core_utils);
    return out;
}

std::string csv_header() {
    return "scheme,flowdyn,load,workload,topology,seed,mean_fct,mice_fct,"
           "elephant_fct,reorders,retx";
}

std::string csv_row(const RunOutputs& r) {
    const RunConfig& c = r.config;
    std::ostringstream os;
    os << to_string(c.scheme) << ',' << (c.flowdyn ? 1 : 0) << ','
       << format_fixed(c.load, 2) << ',' << c.workload << ','
       << c.topology_label() << ',' << c.seed << ','
       << format_fixed(r.stats.all.mean_us, 3) << ','
       << format_fixed(r.stats.mice.mean_us, 3) << ','
       << format_fixed(r.stats.elephants.mean_us, 3) << ','
       << r.stats.reorder_events << ',' << r.stats.retransmits;
    return os.str();
}

static json fct_json(const FctStats& s) {
    json j;
    j["count"] = s.count;
    j["mean_us"] = format_fixed(s.mean_us, 3);
    j["median_us"] = format_fixed(s.median_us, 3);
    j["p99_us"] = format_fixed(s.p99_us, 3);
    return j;
}

std::string json_report(const RunOutputs& r) {
    json j;
    {
        json cfg;
        std::istringstream dump(dump_config(r.config));
        std::string line;
        while (std::getline(dump, line)) {
            auto eq = line.find(" = ");
            cfg[line.substr(0, eq)] = line.substr(eq + 3);
        }
        j["config"] = cfg;
    }
    j["run_name"] = r.config.run_name;
    j["fct"]["all"] = fct_json(r.stats.all);
    j["fct"]["mice"] = fct_json(r.stats.mice);
    j["fct"]["elephants"] = fct_json(r.stats.elephants);
    j["flows"]["simulated"] = r.flows_simulated;
    j["flows"]["measured"] = r.stats.flows_total;
    j["flows"]["completed"] = r.stats.flows_completed;
    j["reorder_events"] = r.stats.reorder_events;
    j["retransmits"] = r.stats.retransmits;
    j["timeouts"] = r.stats.timeouts;

    json c;
    c["data_segments_sent"] = r.counters.data_segments_sent;
    c["acks_sent"] = r.counters.acks_sent;
    c["packets_delivered"] = r.counters.packets_delivered;
    c["drops"] = r.counters.drops;
    c["probe_copies_sent"] = r.counters.probe_copies_sent;
    c["probes_consumed"] = r.counters.probes_consumed;
    c["probe_bytes"] = r.counters.probe_bytes;
    c["probes_returned_to_origin"] = r.counters.probes_returned_to_origin;
    c["probe_loop_drops"] = r.counters.probe_loop_drops;
    c["gap_headers_attached"] = r.counters.gap_headers_attached;
    c["gap_headers_stored"] = r.counters.gap_headers_stored;
    j["counters"] = c;

    const int tors = r.config.topo.pods * r.config.topo.edges_per_pod;
    j["memory"]["tracked_tors"] = tors;
    j["memory"]["remote_table_bytes"] = remote_table_bytes(tors);
    j["memory"]["local_table_bytes"] = local_table_bytes(tors);

    j["core_util_cov"] = r.core_util_cov
                             ? json(format_fixed(*r.core_util_cov, 4))
                             : json(nullptr);
    j["events_processed"] = r.events_processed;
    j["wall_seconds"] = format_fixed(r.wall_seconds, 3);
    return j.dump(2) + "\n";
}

void append_csv(const std::string& path, const std::string& row) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const bool fresh = !fs::exists(p) || fs::file_size(p) == 0;
    std::ofstream out(p, std::ios::app);
    if (!out) throw std::runtime_error("cannot open for append: " + path);
    if (fresh) out << csv_header() << '\n';
    out << row << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << text;
}

void write_run_outputs(const RunOutputs& r) {
    const fs::path dir(r.config.out_dir);
    write_text_file((dir / (r.config.run_name + ".json")).string(),
                    json_report(r));
    append_csv((dir / "results.csv").string(), csv_row(r));
}

std::vector<RunOutputs> run_sweep(const SweepSpec& spec) {
    std::vector<RunOutputs> out;
    for (Scheme scheme : spec.schemes)
        for (double load : spec.loads)
            for (bool fd : spec.flowdyn_modes)
                for (std::uint64_t seed : spec.seeds) {
                    RunConfig cfg = spec.base;
                    cfg.scheme = scheme;
                    cfg.load = load;
                    cfg.flowdyn = fd;
                    cfg.seed = seed;
                    cfg.run_name.clear();
                    out.push_back(run_simulation(cfg));
                    if (spec.write_outputs) write_run_outputs(out.back());
                }
    return out;
}

std::string sweep_summary_csv(const std::vector<RunOutputs>& rows) {
    struct Cell {
        double sum = 0;
        int n = 0;
    };
    std::map<std::string, std::pair<Cell, Cell>> groups;  // static, flowdyn
    for (const RunOutputs& r : rows) {
        if (r.stats.all.count == 0) continue;
        std::ostringstream key;
        key << to_string(r.config.scheme) << ','
            << format_fixed(r.config.load, 2) << ',' << r.config.workload
            << ',' << r.config.topology_label();
        auto& g = groups[key.str()];
        Cell& cell = r.config.flowdyn ? g.second : g.first;
        cell.sum += r.stats.all.mean_us;
        cell.n += 1;
    }
    std::ostringstream os;
    os << "scheme,load,workload,topology,mean_fct_static,mean_fct_flowdyn,"
          "ratio\n";
    for (const auto& [key, g] : groups) {
        const auto& [st, dy] = g;
        const double ms = st.n ? st.sum / st.n : std::nan("");
        const double md = dy.n ? dy.sum / dy.n : std::nan("");
        os << key << ',' << format_fixed(ms, 3) << ',' << format_fixed(md, 3)
           << ',' << format_fixed(md > 0 ? ms / md : std::nan(""), 4) << '\n';
    }
    return os.str();
}

}  // namespace fdsim
