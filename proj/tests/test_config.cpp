#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fdsim/config.hpp"

using namespace fdsim;

TEST_CASE("defaults validate and describe themselves") {
    RunConfig c;
    CHECK_NOTHROW(validate_config(c));
    CHECK(c.topology_label() == "symmetric");
    CHECK(c.connections_per_client() == 5);
    CHECK(c.derived_run_name() == "letflow_flowdyn_web-search_0.50_symmetric_s1");

    c.topo.disabled_cores = {0};
    c.scheme = Scheme::Hula;
    c.flowdyn = false;
    c.load = 0.9;
    c.seed = 12;
    CHECK(c.topology_label() == "asymmetric");
    CHECK(c.connections_per_client() == 9);
    CHECK(c.derived_run_name() == "hula_static_web-search_0.90_asymmetric_s12");
}

TEST_CASE("dump -> parse round-trips every field") {
    RunConfig c;
    c.topo.num_cores = 9;
    c.topo.pods = 6;
    c.topo.aggs_per_pod = 3;
    c.topo.edges_per_pod = 4;
    c.topo.hosts_per_edge = 5;
    c.topo.fabric_bps = 25'000'000'000;
    c.topo.host_bps = 1'000'000'000;
    c.topo.link_delay_ns = 750;
    c.topo.queue_bytes = 99'000;
    c.topo.disabled_cores = {2, 7};
    c.scheme = Scheme::Hula;
    c.flowdyn = false;
    c.static_gap = us(450);
    c.probe_interval = us(250);
    c.step.step_ns = us(60);
    c.step.threshold = 0.85;
    c.staleness = us(900);
    c.tcp.mss = 9000;
    c.tcp.rwnd = 1 << 20;
    c.tcp.init_cwnd_mss = 2;
    c.tcp.min_rto = us(750);
    c.tcp.max_rto = ms(50);
    c.workload = "data-mining";
    c.load = 0.35;
    c.seed = 99;
    c.duration = ms(123);
    c.warmup = ms(7);
    c.flowlet_mode = FlowletTable::Mode::Hashed;
    c.flowlet_slots = 512;
    c.collect_port_samples = true;
    c.trace_file = "t.log";
    c.out_dir = "results";
    c.run_name = "custom";

    const std::string text = dump_config(c);
    RunConfig d = parse_config_text(text);
    CHECK(dump_config(d) == text);
    CHECK(d.topo.num_cores == 9);
    CHECK(d.topo.disabled_cores == std::set<int>{2, 7});
    CHECK(d.scheme == Scheme::Hula);
    CHECK_FALSE(d.flowdyn);
    CHECK(d.static_gap == us(450));
    CHECK(d.step.step_ns == us(60));
    CHECK(d.step.threshold == 0.85);
    CHECK(d.tcp.rwnd == 1 << 20);
    CHECK(d.load == 0.35);
    CHECK(d.duration == ms(123));
    CHECK(d.flowlet_mode == FlowletTable::Mode::Hashed);
    CHECK(d.collect_port_samples);
    CHECK(d.trace_file == "t.log");
    CHECK(d.run_name == "custom");
}

TEST_CASE("defaults round-trip including the none/inf spellings") {
    RunConfig c;
    c.static_gap = kTimeInf;
    const std::string text = dump_config(c);
    CHECK(text.find("static_gap_us = inf") != std::string::npos);
    CHECK(text.find("topo.disabled_cores = none") != std::string::npos);
    CHECK(text.find("trace_file = none") != std::string::npos);
    RunConfig d = parse_config_text(text);
    CHECK(d.static_gap == kTimeInf);
    CHECK(d.topo.disabled_cores.empty());
    CHECK(d.trace_file.empty());
    CHECK(d.run_name.empty());
    CHECK(dump_config(d) == text);
}

TEST_CASE("parser accepts comments, blanks and spacing; rejects junk") {
    RunConfig c = parse_config_text(
        "# a comment\n"
        "\n"
        "  scheme=ecmp  \n"
        "load = 0.8\n"
        "topo.disabled_cores = 1 , 3\n");
    CHECK(c.scheme == Scheme::Ecmp);
    CHECK(c.load == 0.8);
    CHECK(c.topo.disabled_cores == std::set<int>{1, 3});

    CHECK_THROWS_WITH_AS(parse_config_text("bogus_key = 1\n"),
                         "unknown config key: bogus_key", std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("scheme ecmp\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("load = fast\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("seed = 12x\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("flowdyn = maybe\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("scheme = wecmp\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("flowlet_mode = direct\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("static_gap_us = -5\n"), std::runtime_error);
}

TEST_CASE("parsing layers onto a base config") {
    RunConfig base;
    base.load = 0.9;
    base.seed = 5;
    RunConfig c = parse_config_text("seed = 6\n", base);
    CHECK(c.load == 0.9);  // untouched
    CHECK(c.seed == 6);
}

TEST_CASE("config files parse like text") {
    const char* path = "cfg_roundtrip.conf";
    {
        std::ofstream out(path);
        out << "scheme = hula\nload = 0.1\n";
    }
    RunConfig c = parse_config_file(path);
    CHECK(c.scheme == Scheme::Hula);
    CHECK(c.load == 0.1);
    std::remove(path);
    CHECK_THROWS_AS(parse_config_file("missing.conf"), std::runtime_error);
}

TEST_CASE("validation names the failing field") {
    auto expect_field = [](RunConfig c, const std::string& field) {
        try {
            validate_config(c);
            FAIL("expected validate_config to throw for " << field);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("'" + field + "'") !=
                  std::string::npos);
        }
    };

    RunConfig c;
    c.load = 0;
    expect_field(c, "load");
    c = {};
    c.load = 0.04;  // rounds to zero connections
    expect_field(c, "load");
    c = {};
    c.topo.num_cores = 3;  // not divisible by aggs_per_pod
    expect_field(c, "topo");
    c = {};
    c.step.threshold = 1.5;
    expect_field(c, "detect_threshold");
    c = {};
    c.tcp.mss = 20;
    expect_field(c, "tcp.mss");
    c = {};
    c.tcp.rwnd = 100;
    expect_field(c, "tcp.rwnd_bytes");
    c = {};
    c.tcp.max_rto = c.tcp.min_rto - 1;
    expect_field(c, "tcp.max_rto_us");
    c = {};
    c.warmup = c.duration;
    expect_field(c, "warmup_us");
    c = {};
    c.workload.clear();
    expect_field(c, "workload");
    c = {};
    c.flowlet_mode = FlowletTable::Mode::Hashed;
    c.flowlet_slots = 0;
    expect_field(c, "flowlet_slots");
    c = {};
    c.static_gap = -us(1);
    expect_field(c, "static_gap_us");
}

TEST_CASE("presets") {
    auto names = preset_names();
    REQUIRE(names.size() == 3);
    for (const auto& n : names) {
        RunConfig c = preset_config(n);
        CHECK_NOTHROW(validate_config(c));
    }
    RunConfig ws = preset_config("symmetric-websearch-50");
    CHECK(ws.scheme == Scheme::LetFlow);
    CHECK(ws.load == 0.5);
    CHECK(ws.workload == "web-search");
    CHECK(ws.topology_label() == "symmetric");

    RunConfig dm = preset_config("symmetric-datamining-10");
    CHECK(dm.scheme == Scheme::Hula);
    CHECK(dm.load == 0.1);

    RunConfig as = preset_config("asymmetric-websearch-90");
    CHECK(as.load == 0.9);
    CHECK(as.topo.disabled_cores == std::set<int>{0});

    CHECK_THROWS_AS(preset_config("nope"), std::runtime_error);
}

TEST_CASE("workload names resolve against the data directory") {
    const std::string dir = FDSIM_DATA_DIR;
    CHECK(resolve_cdf_path("web-search", dir) == dir + "/web-search.csv");
    CHECK(resolve_cdf_path("data-mining", dir) == dir + "/data-mining.csv");
    // An existing path passes through untouched.
    CHECK(resolve_cdf_path(dir + "/web-search.csv", "elsewhere") ==
          dir + "/web-search.csv");
    CHECK_THROWS_AS(resolve_cdf_path("no-such-workload", dir), std::runtime_error);
}
