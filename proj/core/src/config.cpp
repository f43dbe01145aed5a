#include "fdsim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fdsim/metrics.hpp"

namespace fdsim {

std::string RunConfig::derived_run_name() const {
    std::ostringstream os;
    os << to_string(scheme) << '_' << (flowdyn ? "flowdyn" : "static") << '_'
       << workload << '_' << format_fixed(load, 2) << '_' << topology_label()
       << "_s" << seed;
    return os.str();
}

int RunConfig::connections_per_client() const {
    return static_cast<int>(std::lround(load * 10));
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw std::runtime_error("config key '" + key + "': not a boolean: " + v);
}

std::int64_t parse_i64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        std::int64_t r = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': not an integer: " + v);
    }
}

double parse_f64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': not a number: " + v);
    }
}

// Gap values admit "inf" (pin the first decision forever) and 0.
TimeNs parse_gap_us(const std::string& v, const std::string& key) {
    if (v == "inf") return kTimeInf;
    std::int64_t g = parse_i64(v, key);
    if (g < 0) throw std::runtime_error("config key '" + key + "': negative");
    return us(g);
}

std::string gap_us_str(TimeNs t) {
    if (t == kTimeInf) return "inf";
    return std::to_string(t / kNsPerUs);
}

}  // namespace

void apply_config_kv(RunConfig& c, const std::string& rawkey,
                     const std::string& rawval) {
    const std::string key = trim(rawkey);
    const std::string v = trim(rawval);
    auto i64 = [&] { return parse_i64(v, key); };
    auto f64 = [&] { return parse_f64(v, key); };

    if (key == "topo.num_cores") c.topo.num_cores = static_cast<int>(i64());
    else if (key == "topo.pods") c.topo.pods = static_cast<int>(i64());
    else if (key == "topo.aggs_per_pod") c.topo.aggs_per_pod = static_cast<int>(i64());
    else if (key == "topo.edges_per_pod") c.topo.edges_per_pod = static_cast<int>(i64());
    else if (key == "topo.hosts_per_edge") c.topo.hosts_per_edge = static_cast<int>(i64());
    else if (key == "topo.fabric_gbps") c.topo.fabric_bps = static_cast<std::int64_t>(f64() * 1e9);
    else if (key == "topo.host_gbps") c.topo.host_bps = static_cast<std::int64_t>(f64() * 1e9);
    else if (key == "topo.link_delay_ns") c.topo.link_delay_ns = i64();
    else if (key == "topo.queue_bytes") c.topo.queue_bytes = i64();
    else if (key == "topo.disabled_cores") {
        c.topo.disabled_cores.clear();
        if (v != "none") {
            std::istringstream is(v);
            std::string tok;
            while (std::getline(is, tok, ','))
                c.topo.disabled_cores.insert(
                    static_cast<int>(parse_i64(trim(tok), key)));
        }
    } else if (key == "scheme") {
        auto s = scheme_from_string(v);
        if (!s) throw std::runtime_error("config key 'scheme': unknown scheme: " + v);
        c.scheme = *s;
    } else if (key == "flowdyn") c.flowdyn = parse_bool(v, key);
    else if (key == "static_gap_us") c.static_gap = parse_gap_us(v, key);
    else if (key == "probe_interval_us") c.probe_interval = us(i64());
    else if (key == "step_us") c.step.step_ns = us(i64());
    else if (key == "detect_threshold") c.step.threshold = f64();
    else if (key == "staleness_us") c.staleness = us(i64());
    else if (key == "tcp.mss") c.tcp.mss = static_cast<int>(i64());
    else if (key == "tcp.rwnd_bytes") c.tcp.rwnd = i64();
    else if (key == "tcp.init_cwnd_mss") c.tcp.init_cwnd_mss = static_cast<int>(i64());
    else if (key == "tcp.min_rto_us") c.tcp.min_rto = us(i64());
    else if (key == "tcp.max_rto_us") c.tcp.max_rto = us(i64());
    else if (key == "workload") c.workload = v;
    else if (key == "load") c.load = f64();
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(i64());
    else if (key == "duration_us") c.duration = us(i64());
    else if (key == "warmup_us") c.warmup = us(i64());
    else if (key == "flowlet_mode") {
        if (v == "exact") c.flowlet_mode = FlowletTable::Mode::Exact;
        else if (v == "hashed") c.flowlet_mode = FlowletTable::Mode::Hashed;
        else throw std::runtime_error("config key 'flowlet_mode': exact or hashed");
    } else if (key == "flowlet_slots") c.flowlet_slots = static_cast<std::size_t>(i64());
    else if (key == "collect_port_samples") c.collect_port_samples = parse_bool(v, key);
    else if (key == "trace_file") c.trace_file = v == "none" ? "" : v;
    else if (key == "out_dir") c.out_dir = v;
    else if (key == "run_name") c.run_name = v == "none" ? "" : v;
    else throw std::runtime_error("unknown config key: " + key);
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        apply_config_kv(base, t.substr(0, eq), t.substr(eq + 1));
    }
    return base;
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream os;
    os << "topo.num_cores = " << c.topo.num_cores << '\n';
    os << "topo.pods = " << c.topo.pods << '\n';
    os << "topo.aggs_per_pod = " << c.topo.aggs_per_pod << '\n';
    os << "topo.edges_per_pod = " << c.topo.edges_per_pod << '\n';
    os << "topo.hosts_per_edge = " << c.topo.hosts_per_edge << '\n';
    os << "topo.fabric_gbps = " << format_fixed(c.topo.fabric_bps / 1e9, 3) << '\n';
    os << "topo.host_gbps = " << format_fixed(c.topo.host_bps / 1e9, 3) << '\n';
    os << "topo.link_delay_ns = " << c.topo.link_delay_ns << '\n';
    os << "topo.queue_bytes = " << c.topo.queue_bytes << '\n';
    os << "topo.disabled_cores = ";
    if (c.topo.disabled_cores.empty()) {
        os << "none";
    } else {
        bool first = true;
        for (int core : c.topo.disabled_cores) {
            if (!first) os << ',';
            os << core;
            first = false;
        }
    }
    os << '\n';
    os << "scheme = " << to_string(c.scheme) << '\n';
    os << "flowdyn = " << (c.flowdyn ? "on" : "off") << '\n';
    os << "static_gap_us = " << gap_us_str(c.static_gap) << '\n';
    os << "probe_interval_us = " << c.probe_interval / kNsPerUs << '\n';
    os << "step_us = " << c.step.step_ns / kNsPerUs << '\n';
    os << "detect_threshold = " << format_fixed(c.step.threshold, 4) << '\n';
    os << "staleness_us = " << c.staleness / kNsPerUs << '\n';
    os << "tcp.mss = " << c.tcp.mss << '\n';
    os << "tcp.rwnd_bytes = " << c.tcp.rwnd << '\n';
    os << "tcp.init_cwnd_mss = " << c.tcp.init_cwnd_mss << '\n';
    os << "tcp.min_rto_us = " << c.tcp.min_rto / kNsPerUs << '\n';
    os << "tcp.max_rto_us = " << c.tcp.max_rto / kNsPerUs << '\n';
    os << "workload = " << c.workload << '\n';
    os << "load = " << format_fixed(c.load, 4) << '\n';
    os << "seed = " << c.seed << '\n';
    os << "duration_us = " << c.duration / kNsPerUs << '\n';
    os << "warmup_us = " << c.warmup / kNsPerUs << '\n';
    os << "flowlet_mode = "
       << (c.flowlet_mode == FlowletTable::Mode::Exact ? "exact" : "hashed") << '\n';
    os << "flowlet_slots = " << c.flowlet_slots << '\n';
    os << "collect_port_samples = " << (c.collect_port_samples ? "on" : "off") << '\n';
    os << "trace_file = " << (c.trace_file.empty() ? "none" : c.trace_file) << '\n';
    os << "out_dir = " << c.out_dir << '\n';
    os << "run_name = " << (c.run_name.empty() ? "none" : c.run_name) << '\n';
    return os.str();
}

void validate_config(const RunConfig& c) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("config field '" + field + "': " + why);
    };
    // The topology builder re-validates; surface its message under a field.
    try {
        (void)build_fat_tree(c.topo);
    } catch (const std::invalid_argument& e) {
        fail("topo", e.what());
    }
    if (c.load <= 0 || c.load > 1) fail("load", "must be in (0,1]");
    if (std::lround(c.load * 10) < 1) fail("load", "rounds to zero connections");
    if (c.probe_interval <= 0) fail("probe_interval_us", "must be positive");
    if (c.step.step_ns <= 0) fail("step_us", "must be positive");
    if (c.step.threshold <= 0 || c.step.threshold > 1)
        fail("detect_threshold", "must be in (0,1]");
    if (c.staleness <= 0) fail("staleness_us", "must be positive");
    if (c.static_gap < 0) fail("static_gap_us", "must be >= 0");
    if (c.tcp.mss < 64 || c.tcp.mss > 9000) fail("tcp.mss", "must be in [64,9000]");
    if (c.tcp.rwnd < c.tcp.mss) fail("tcp.rwnd_bytes", "smaller than one mss");
    if (c.tcp.init_cwnd_mss < 1) fail("tcp.init_cwnd_mss", "must be >= 1");
    if (c.tcp.min_rto <= 0) fail("tcp.min_rto_us", "must be positive");
    if (c.tcp.max_rto < c.tcp.min_rto) fail("tcp.max_rto_us", "below min_rto");
    if (c.duration <= 0) fail("duration_us", "must be positive");
    if (c.warmup < 0 || c.warmup >= c.duration)
        fail("warmup_us", "must be in [0, duration)");
    if (c.workload.empty()) fail("workload", "must not be empty");
    if (c.flowlet_mode == FlowletTable::Mode::Hashed && c.flowlet_slots == 0)
        fail("flowlet_slots", "must be positive in hashed mode");
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    if (name == "symmetric-websearch-50") {
        c.scheme = Scheme::LetFlow;
        c.workload = "web-search";
        c.load = 0.5;
    } else if (name == "symmetric-datamining-10") {
        c.scheme = Scheme::Hula;
        c.workload = "data-mining";
        c.load = 0.1;
    } else if (name == "asymmetric-websearch-90") {
        c.scheme = Scheme::LetFlow;
        c.workload = "web-search";
        c.load = 0.9;
        c.topo.disabled_cores = {0};
    } else {
        throw std::runtime_error("unknown preset: " + name);
    }
    return c;
}

std::vector<std::string> preset_names() {
    return {"symmetric-websearch-50", "symmetric-datamining-10",
            "asymmetric-websearch-90"};
}

std::string resolve_cdf_path(const std::string& workload,
                             const std::string& data_dir) {
    namespace fs = std::filesystem;
    if (fs::exists(workload)) return workload;
    fs::path p = fs::path(data_dir) / (workload + ".csv");
    if (fs::exists(p)) return p.string();
    throw std::runtime_error("cannot resolve workload '" + workload +
                             "': no such file and no " + p.string());
}

}  // namespace fdsim
