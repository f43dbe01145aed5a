#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdsim/harness.hpp"

namespace {

using namespace fdsim;

struct ConfigOpts {
    std::string preset;
    std::string config_file;
    std::vector<std::string> sets;
};

void add_config_opts(CLI::App* cmd, ConfigOpts& o) {
    cmd->add_option("--preset", o.preset,
                    "start from a named preset (see `fdsim presets`)");
    cmd->add_option("-c,--config", o.config_file, "key = value config file");
    cmd->add_option("--set", o.sets,
                    "override a single key, e.g. --set load=0.9 (repeatable)")
        ->expected(-1);
}

RunConfig build_config(const ConfigOpts& o) {
    RunConfig cfg;
    if (!o.preset.empty()) cfg = preset_config(o.preset);
    if (!o.config_file.empty()) cfg = parse_config_file(o.config_file, cfg);
    for (const std::string& kv : o.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects key=value, got: " + kv);
        apply_config_kv(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int cmd_run(const ConfigOpts& o, bool no_write) {
    RunConfig cfg = build_config(o);
    validate_config(cfg);
    RunOutputs out = run_simulation(cfg);
    if (!no_write) write_run_outputs(out);
    std::cout << csv_header() << '\n' << csv_row(out) << '\n';
    std::cerr << "flows " << out.stats.flows_completed << '/'
              << out.stats.flows_total << " completed, "
              << out.events_processed << " events in "
              << format_fixed(out.wall_seconds, 2) << "s";
    if (!no_write)
        std::cerr << ", wrote " << cfg.out_dir << '/' << out.config.run_name
                  << ".json";
    std::cerr << '\n';
    return 0;
}

int cmd_sweep(const ConfigOpts& o, const std::string& schemes,
              const std::string& loads, const std::string& seeds,
              const std::string& flowdyn_modes, bool no_write) {
    SweepSpec spec;
    spec.base = build_config(o);
    spec.write_outputs = !no_write;
    for (const std::string& s : split_csv(schemes)) {
        auto sch = scheme_from_string(s);
        if (!sch) throw std::runtime_error("unknown scheme: " + s);
        spec.schemes.push_back(*sch);
    }
    for (const std::string& s : split_csv(loads)) spec.loads.push_back(std::stod(s));
    spec.seeds.clear();
    for (const std::string& s : split_csv(seeds))
        spec.seeds.push_back(std::stoull(s));
    if (flowdyn_modes == "both") spec.flowdyn_modes = {false, true};
    else if (flowdyn_modes == "on") spec.flowdyn_modes = {true};
    else if (flowdyn_modes == "off") spec.flowdyn_modes = {false};
    else throw std::runtime_error("--flowdyn must be both, on or off");

    const auto rows = run_sweep(spec);
    const std::string summary = sweep_summary_csv(rows);
    if (!no_write)
        write_text_file(spec.base.out_dir + "/sweep_summary.csv", summary);
    std::cout << summary;
    return 0;
}

int cmd_topo(const ConfigOpts& o, bool edge_list, int path_src, int path_dst) {
    RunConfig cfg = build_config(o);
    NetworkGraph g = build_fat_tree(cfg.topo);
    std::cout << "nodes " << g.nodes.size() << " (hosts " << g.num_hosts()
              << ", edge " << g.num_edges() << ", agg " << g.num_aggs()
              << ", core " << cfg.topo.num_cores << ")\n";
    std::cout << "links " << g.links.size() << '\n';
    std::cout << "bisection_gbps "
              << format_fixed(bisection_bandwidth_bps(g) / 1e9, 3) << '\n';
    if (edge_list) std::cout << dump_edge_list(g);
    if (path_src >= 0 && path_dst >= 0) {
        auto paths = disjoint_paths(g, g.edge_node(path_src), g.edge_node(path_dst));
        std::cout << "paths edge" << path_src << " -> edge" << path_dst << ": "
                  << paths.size() << '\n';
        for (const auto& p : paths) {
            std::cout << "  via";
            for (int n : p) std::cout << ' ' << n;
            if (p.empty()) std::cout << " (same tor)";
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_tables(const ConfigOpts& o, int tor_index, std::int64_t until_us) {
    RunConfig cfg = build_config(o);
    validate_config(cfg);
    NetworkGraph g = build_fat_tree(cfg.topo);
    if (tor_index < 0 || tor_index >= g.num_edges())
        throw std::runtime_error("no such edge tor index");

    const SizeCdf cdf =
        SizeCdf::load_csv(resolve_cdf_path(cfg.workload, default_data_dir()));
    LoadSpec load;
    load.load_fraction = cfg.load;
    load.connections_per_client = cfg.connections_per_client();
    load.client_hosts = client_hosts(g);
    load.server_hosts = server_hosts(g);
    load.seed = cfg.seed;
    const TimeNs until = until_us > 0 ? us(until_us) : cfg.duration;

    Simulation sim(g, cfg);
    sim.add_arrivals(generate_arrivals(load, cdf, until, cfg.topo.host_bps));
    sim.run_until(until);

    const int tor_node = g.edge_node(tor_index);
    std::cout << sim.dump_tor_tables(tor_node);
    std::cout << "gap table view (us; fallback "
              << (cfg.static_gap == kTimeInf
                      ? std::string("inf")
                      : std::to_string(cfg.static_gap / kNsPerUs))
              << ")\n";
    for (int e = 0; e < g.num_edges(); ++e) {
        if (e == tor_index) continue;
        const TimeNs gap = sim.gap_for(tor_node, g.edge_node(e));
        std::cout << "  -> edge" << e << ": "
                  << (gap == kTimeInf ? std::string("inf")
                                      : std::to_string(gap / kNsPerUs))
                  << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowlet-gap network simulator"};
    app.require_subcommand(1);

    ConfigOpts run_opts;
    bool run_no_write = false;
    CLI::App* run = app.add_subcommand("run", "simulate one configuration");
    add_config_opts(run, run_opts);
    run->add_flag("--no-write", run_no_write, "skip JSON/CSV output files");

    ConfigOpts sweep_opts;
    std::string sweep_schemes = "ecmp,letflow,hula";
    std::string sweep_loads = "0.1,0.5,0.9";
    std::string sweep_seeds = "1,2,3,4,5";
    std::string sweep_flowdyn = "both";
    bool sweep_no_write = false;
    CLI::App* sweep =
        app.add_subcommand("sweep", "run a scheme/load/seed grid");
    add_config_opts(sweep, sweep_opts);
    sweep->add_option("--schemes", sweep_schemes, "comma list");
    sweep->add_option("--loads", sweep_loads, "comma list of fractions");
    sweep->add_option("--seeds", sweep_seeds, "comma list");
    sweep->add_option("--flowdyn", sweep_flowdyn, "both, on or off");
    sweep->add_flag("--no-write", sweep_no_write, "don't write output files");

    ConfigOpts topo_opts;
    bool topo_edges = false;
    std::pair<int, int> topo_path{-1, -1};
    CLI::App* topo = app.add_subcommand("topo", "inspect the topology");
    add_config_opts(topo, topo_opts);
    topo->add_flag("--edge-list", topo_edges, "print every link");
    topo->add_option("--paths", topo_path,
                     "print up-down paths between two edge tor indexes");

    ConfigOpts tables_opts;
    int tables_tor = 0;
    std::int64_t tables_until = 0;
    CLI::App* tables =
        app.add_subcommand("tables", "run traffic, then dump a ToR's state");
    add_config_opts(tables, tables_opts);
    tables->add_option("--tor", tables_tor, "edge tor index")->required();
    tables->add_option("--until-us", tables_until,
                       "simulate this long (default: config duration)");

    ConfigOpts dump_opts;
    CLI::App* dump = app.add_subcommand("dump-config", "print the resolved config");
    add_config_opts(dump, dump_opts);

    CLI::App* presets = app.add_subcommand("presets", "list built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts, run_no_write);
        if (sweep->parsed())
            return cmd_sweep(sweep_opts, sweep_schemes, sweep_loads,
                             sweep_seeds, sweep_flowdyn, sweep_no_write);
        if (topo->parsed())
            return cmd_topo(topo_opts, topo_edges, topo_path.first,
                            topo_path.second);
        if (tables->parsed()) return cmd_tables(tables_opts, tables_tor, tables_until);
        if (dump->parsed()) {
            RunConfig cfg = build_config(dump_opts);
            validate_config(cfg);
            std::cout << dump_config(cfg);
            return 0;
        }
        if (presets->parsed()) {
            for (const auto& name : preset_names()) std::cout << name << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
