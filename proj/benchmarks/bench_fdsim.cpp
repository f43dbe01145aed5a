#include <benchmark/benchmark.h>

#include <vector>

#include "fdsim/codec.hpp"
#include "fdsim/dataplane.hpp"
#include "fdsim/engine.hpp"
#include "fdsim/flowdyn.hpp"
#include "fdsim/random.hpp"
#include "fdsim/simulation.hpp"
#include "fdsim/topology.hpp"

namespace {

void BM_EngineDispatch(benchmark::State& state) {
    using namespace fdsim;
    for (auto _ : state) {
        (void)_;
        state.PauseTiming();
        Engine eng;
        constexpr int kEvents = 100'000;
        Rng rng(7);
        for (int i = 0; i < kEvents; ++i)
            eng.schedule(static_cast<TimeNs>(rng.next_below(kEvents)),
                         EventKind::FlowStart, 0, i, 0);
        eng.set_dispatcher([](const Event&) {});
        state.ResumeTiming();
        eng.run_until(kEvents);
        benchmark::DoNotOptimize(eng.processed());
    }
    state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_EngineDispatch)->Unit(benchmark::kMillisecond);

void BM_QuantizeGap(benchmark::State& state) {
    using namespace fdsim;
    const StepFunction f{us(100), 0.70};
    Rng rng(3);
    std::vector<TimeNs> deltas(4096);
    for (auto& d : deltas) d = static_cast<TimeNs>(rng.next_below(ms(10)));
    std::size_t i = 0;
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(quantize_gap(deltas[i++ & 4095], f));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QuantizeGap);

void BM_ProbeCodec(benchmark::State& state) {
    using namespace fdsim;
    ProbeHeader p;
    p.origin_tor = 64;
    p.timestamp = ms(123);
    p.add_hop(72);
    p.add_hop(80);
    p.add_hop(78);
    for (auto _ : state) {
        (void)_;
        const auto wire = encode_probe(p);
        benchmark::DoNotOptimize(decode_probe(wire.data(), wire.size()));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ProbeCodec);

void BM_RouteProbe(benchmark::State& state) {
    using namespace fdsim;
    const NetworkGraph g = build_fat_tree(FatTreeSpec{});
    const SwitchInfo agg = make_switch_info(g, g.agg_node(0));
    const int ingress = agg.port_to(g.edge_node(0));
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(
            route_probe(agg, static_cast<std::uint32_t>(g.edge_node(0)), 0,
                        ingress));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RouteProbe);

// Whole-stack throughput: a mixed TCP run over the reference fabric,
// reported as simulated events per wall second.
void BM_EndToEnd(benchmark::State& state) {
    using namespace fdsim;
    const NetworkGraph g = build_fat_tree(FatTreeSpec{});
    std::int64_t events = 0;
    for (auto _ : state) {
        (void)_;
        RunConfig cfg;
        cfg.scheme = Scheme::LetFlow;
        cfg.flowdyn = true;
        Simulation sim(g, cfg);
        Rng rng(11);
        for (int i = 0; i < 64; ++i)
            sim.start_flow(static_cast<int>(rng.next_below(32)),
                           32 + static_cast<int>(rng.next_below(32)),
                           20'000 + static_cast<std::int64_t>(
                                        rng.next_below(80'000)),
                           static_cast<TimeNs>(rng.next_below(ms(1))));
        sim.run_until(ms(5));
        events += sim.engine().processed();
    }
    state.SetItemsProcessed(events);
}
BENCHMARK(BM_EndToEnd)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
