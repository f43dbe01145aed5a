#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "fdsim/engine.hpp"

using namespace fdsim;

TEST_CASE("events dispatch in time order, ties in insertion order") {
    Engine eng;
    std::vector<std::uint64_t> order;
    eng.set_dispatcher([&](const Event& ev) { order.push_back(ev.arg0); });

    eng.schedule(us(30), EventKind::TimerFire, -1, 3);
    eng.schedule(us(10), EventKind::TimerFire, -1, 1);
    eng.schedule(us(20), EventKind::TimerFire, -1, 20);
    eng.schedule(us(20), EventKind::TimerFire, -1, 21);  // same timestamp
    eng.schedule(us(20), EventKind::TimerFire, -1, 22);

    CHECK(eng.run_until(us(100)) == 5);
    CHECK(order == std::vector<std::uint64_t>{1, 20, 21, 22, 3});
    CHECK(eng.now() == us(100));
    CHECK(eng.empty());
}

TEST_CASE("run_until stops exactly at the horizon") {
    Engine eng;
    std::vector<std::uint64_t> seen;
    eng.set_dispatcher([&](const Event& ev) { seen.push_back(ev.arg0); });
    eng.schedule(us(50), EventKind::TimerFire, -1, 1);
    eng.schedule(us(100), EventKind::TimerFire, -1, 2);  // boundary included
    eng.schedule(us(101), EventKind::TimerFire, -1, 3);

    eng.run_until(us(100));
    CHECK(seen == std::vector<std::uint64_t>{1, 2});
    CHECK(eng.pending() == 1);
    eng.run_until(us(200));
    CHECK(seen.size() == 3);
}

TEST_CASE("scheduling into the past throws") {
    Engine eng;
    eng.set_dispatcher([](const Event&) {});
    eng.schedule(us(5), EventKind::TimerFire);
    eng.run_until(us(10));
    CHECK_THROWS_AS(eng.schedule(us(9), EventKind::TimerFire), std::logic_error);
    CHECK_NOTHROW(eng.schedule(us(10), EventKind::TimerFire));  // now is fine
}

TEST_CASE("cancel suppresses a pending event; cancelling fired is a no-op") {
    Engine eng;
    int fired = 0;
    eng.set_dispatcher([&](const Event&) { ++fired; });

    EventHandle a = eng.schedule(us(10), EventKind::TimerFire);
    EventHandle b = eng.schedule(us(20), EventKind::TimerFire);
    eng.cancel(b);
    CHECK(eng.pending() == 1);
    eng.run_until(us(100));
    CHECK(fired == 1);

    eng.cancel(a);  // already fired
    eng.cancel(b);  // already cancelled
    CHECK(eng.empty());
    eng.schedule(us(200), EventKind::TimerFire);
    eng.run_until(us(300));
    CHECK(fired == 2);
}

TEST_CASE("a self-rescheduling 100us timer fires 10 times within 1ms") {
    Engine eng;
    int fired = 0;
    eng.set_dispatcher([&](const Event& ev) {
        ++fired;
        eng.schedule(ev.time + us(100), EventKind::TimerFire, ev.node);
    });
    eng.schedule(us(100), EventKind::TimerFire, 7);
    eng.run_until(ms(1));
    CHECK(fired == 10);  // 100us..1000us inclusive
    CHECK(eng.pending() == 1);
}

TEST_CASE("dispatcher can schedule at the current instant") {
    Engine eng;
    std::vector<int> order;
    eng.set_dispatcher([&](const Event& ev) {
        order.push_back(static_cast<int>(ev.arg0));
        if (ev.arg0 == 1) eng.schedule(ev.time, EventKind::TimerFire, -1, 2);
    });
    eng.schedule(us(10), EventKind::TimerFire, -1, 1);
    eng.schedule(us(10), EventKind::TimerFire, -1, 3);
    eng.run_until(us(10));
    // The chained event lands after already-queued ties.
    CHECK(order == std::vector<int>{1, 3, 2});
}

TEST_CASE("identical schedules replay identically") {
    auto record = [] {
        Engine eng;
        std::vector<std::pair<TimeNs, std::uint64_t>> trace;
        eng.set_tracer([&](const Event& ev) {
            trace.emplace_back(ev.time, ev.arg0);
        });
        eng.set_dispatcher([&](const Event& ev) {
            if (ev.arg0 < 40)
                eng.schedule(ev.time + us(7), EventKind::TimerFire, -1,
                             ev.arg0 + 1);
        });
        for (int i = 0; i < 5; ++i)
            eng.schedule(us(3 * i), EventKind::TimerFire, -1, i);
        eng.run_until(ms(1));
        return trace;
    };
    CHECK(record() == record());
}

TEST_CASE("run_until without a dispatcher is a logic error") {
    Engine eng;
    eng.schedule(us(1), EventKind::TimerFire);
    CHECK_THROWS_AS(eng.run_until(us(2)), std::logic_error);
}
