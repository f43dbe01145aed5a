#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "fdsim/transport.hpp"

using namespace fdsim;

namespace {

struct Collector : SegmentSink {
    std::vector<Segment> sent;
    void send(Segment&& s) override { sent.push_back(std::move(s)); }
};

Segment ack_of(std::uint64_t a, std::uint32_t flow = 1) {
    Segment s;
    s.flow = flow;
    s.is_ack = true;
    s.ack_seq = a;
    return s;
}

Segment data_of(std::uint64_t seq, std::uint32_t len, bool retransmit = false) {
    Segment s;
    s.flow = 1;
    s.is_ack = false;
    s.seq = seq;
    s.length = len;
    s.retransmit = retransmit;
    return s;
}

// Drives a ready sender/receiver pair with a lossless in-order wire and a
// fixed per-segment delay. Returns the completion time.
TimeNs pump_lossless(TcpSender& snd, TcpReceiver& rcv, Collector& c,
                     std::int64_t rwnd_cap) {
    TimeNs now = 0;
    snd.start(now, c);
    std::size_t next = 0;
    std::int64_t fresh_sent = 0, acked = 0;
    while (!snd.complete()) {
        REQUIRE(next < c.sent.size());  // otherwise the sender stalled
        const Segment s = c.sent[next++];
        REQUIRE_FALSE(s.retransmit);
        fresh_sent += s.length;
        CHECK(fresh_sent - acked <= rwnd_cap);
        now += us(10);
        const std::uint64_t a = rcv.on_data(s);
        acked = static_cast<std::int64_t>(a);
        snd.on_ack(ack_of(a, s.flow), now, c);
    }
    return now;
}

}  // namespace

TEST_CASE("segment wire size: framing plus payload, padded to minimum") {
    Segment ack = ack_of(5000);
    CHECK(segment_wire_bytes(ack) == 64);

    Segment full = data_of(0, 1460);
    CHECK(segment_wire_bytes(full) == 1518);
    full.has_gap = true;
    CHECK(segment_wire_bytes(full) == 1527);

    CHECK(segment_wire_bytes(data_of(0, 5)) == 64);
    CHECK(segment_wire_bytes(data_of(0, 6)) == 64);
    CHECK(segment_wire_bytes(data_of(0, 7)) == 65);

    Segment padded_ack = ack_of(1);
    padded_ack.has_gap = true;
    CHECK(segment_wire_bytes(padded_ack) == 67);  // 58 + 9
}

TEST_CASE("a one-segment flow is one data packet and one ack") {
    TcpParams p;
    TcpSender snd(1, 1000, p);
    TcpReceiver rcv(1000);
    Collector c;

    snd.start(us(0), c);
    REQUIRE(c.sent.size() == 1);
    CHECK(c.sent[0].seq == 0);
    CHECK(c.sent[0].length == 1000);
    CHECK_FALSE(c.sent[0].retransmit);
    CHECK(snd.rto_deadline() == p.min_rto);  // armed at start

    const std::uint64_t a = rcv.on_data(c.sent[0]);
    CHECK(a == 1000);
    CHECK(rcv.complete());

    snd.on_ack(ack_of(a), us(120), c);
    CHECK(snd.complete());
    CHECK(snd.finish_time() == us(120));
    CHECK(snd.segments_sent() == 1);
    CHECK(snd.retransmits() == 0);
    CHECK(snd.rto_deadline() == kTimeInf);

    // Completion kills the timer: a late fire must be ignored.
    snd.on_rto(snd.rto_generation(), ms(5), c);
    CHECK(snd.timeouts() == 0);
    CHECK(c.sent.size() == 1);
}

TEST_CASE("initial burst is the initial window") {
    TcpParams p;  // cwnd 10 mss, rwnd 65535
    TcpSender snd(1, 100 * 1460, p);
    Collector c;
    snd.start(0, c);
    REQUIRE(c.sent.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK(c.sent[i].seq == static_cast<std::uint64_t>(i) * 1460);
        CHECK(c.sent[i].length == 1460);
    }
}

TEST_CASE("lossless flows complete exactly, any size") {
    TcpParams p;
    for (std::int64_t size : {1LL, 1000LL, 1460LL, 10000LL, 500000LL}) {
        CAPTURE(size);
        TcpSender snd(1, size, p);
        TcpReceiver rcv(size);
        Collector c;
        const TimeNs done = pump_lossless(snd, rcv, c, p.rwnd);
        CHECK(snd.complete());
        CHECK(snd.finish_time() == done);
        CHECK(rcv.complete());
        CHECK(rcv.delivered_bytes() == size);
        CHECK(rcv.reorder_events() == 0);
        CHECK(rcv.duplicate_segments() == 0);
        CHECK(snd.retransmits() == 0);
        CHECK(snd.timeouts() == 0);
        CHECK(snd.segments_sent() == (size + 1459) / 1460);
    }
}

TEST_CASE("slow start grows one mss per advancing ack") {
    TcpParams p;
    TcpSender snd(1, 10'000'000, p);
    Collector c;
    snd.start(0, c);
    const std::int64_t c0 = snd.cwnd();
    snd.on_ack(ack_of(1460), us(100), c);
    CHECK(snd.cwnd() == c0 + 1460);
    snd.on_ack(ack_of(2 * 1460), us(120), c);
    CHECK(snd.cwnd() == c0 + 2 * 1460);
}

TEST_CASE("receiver counts one reorder per late segment") {
    TcpReceiver rcv(400);
    CHECK(rcv.on_data(data_of(100, 100)) == 0);
    CHECK(rcv.on_data(data_of(200, 100)) == 0);
    CHECK(rcv.on_data(data_of(300, 100)) == 0);
    CHECK(rcv.reorder_events() == 0);  // a leading gap alone is not reordering
    CHECK(rcv.on_data(data_of(0, 100)) == 400);
    CHECK(rcv.reorder_events() == 1);
    CHECK(rcv.delivered_bytes() == 400);
    CHECK(rcv.complete());
}

TEST_CASE("retransmitted fills are never reorders; copies are duplicates") {
    TcpReceiver rcv(300);
    rcv.on_data(data_of(100, 100));
    rcv.on_data(data_of(200, 100));
    rcv.on_data(data_of(0, 100, /*retransmit=*/true));
    CHECK(rcv.reorder_events() == 0);
    CHECK(rcv.rcv_next() == 300);

    TcpReceiver dup(300);
    dup.on_data(data_of(0, 100));
    dup.on_data(data_of(0, 100));
    CHECK(dup.duplicate_segments() == 1);
    CHECK(dup.reorder_events() == 0);
    CHECK(dup.delivered_bytes() == 100);

    // Pure ACKs and empty segments are not data.
    CHECK(dup.on_data(ack_of(50)) == 100);
    CHECK(dup.duplicate_segments() == 1);
}

TEST_CASE("receiver merges overlap without double counting") {
    TcpReceiver rcv(1000);
    rcv.on_data(data_of(0, 100));
    rcv.on_data(data_of(50, 100));  // 50 fresh bytes
    CHECK(rcv.delivered_bytes() == 150);
    CHECK(rcv.rcv_next() == 150);
    rcv.on_data(data_of(400, 100));
    rcv.on_data(data_of(300, 300));  // re-covers the buffered [400,500)
    CHECK(rcv.delivered_bytes() == 150 + 100 + 200);
    CHECK(rcv.rcv_next() == 150);
    rcv.on_data(data_of(150, 150));
    CHECK(rcv.rcv_next() == 600);
}

TEST_CASE("triple duplicate acks trigger one fast retransmit") {
    TcpParams p;
    p.rwnd = 1 << 20;
    TcpSender snd(1, 60 * 1460, p);
    TcpReceiver rcv(60 * 1460);
    Collector c;
    snd.start(0, c);
    REQUIRE(c.sent.size() == 10);

    // First segment is lost; the other nine arrive.
    TimeNs now = us(100);
    for (int i = 1; i < 10; ++i) {
        const std::uint64_t a = rcv.on_data(c.sent[i]);
        CHECK(a == 0);
        snd.on_ack(ack_of(a), now += us(10), c);
    }
    // Exactly one retransmission, of the hole, marked as such.
    REQUIRE(snd.retransmits() == 1);
    const std::int64_t ssthresh = snd.ssthresh();
    CHECK(ssthresh == 5 * 1460);
    bool found = false;
    for (std::size_t i = 10; i < c.sent.size(); ++i) {
        if (c.sent[i].retransmit) {
            CHECK_FALSE(found);
            found = true;
            CHECK(c.sent[i].seq == 0);
            rcv.on_data(c.sent[i]);
        } else {
            CHECK(c.sent[i].seq >= 10 * 1460);  // inflation sends only new data
        }
    }
    CHECK(found);
    CHECK(rcv.reorder_events() == 0);
    CHECK(rcv.rcv_next() == 10 * 1460);

    // The recovery-exiting ack deflates cwnd to ssthresh.
    snd.on_ack(ack_of(10 * 1460), now += us(10), c);
    CHECK(snd.cwnd() == ssthresh);
    CHECK(snd.timeouts() == 0);

    // At cwnd == ssthresh growth switches to congestion avoidance.
    snd.on_ack(ack_of(11 * 1460), now += us(10), c);
    CHECK(snd.cwnd() == ssthresh + 1460 * 1460 / ssthresh);
}

TEST_CASE("partial acks during recovery retransmit the next hole") {
    TcpParams p;
    p.rwnd = 1 << 20;
    TcpSender snd(1, 200 * 1460, p);
    TcpReceiver rcv(200 * 1460);
    Collector c;
    snd.start(0, c);
    REQUIRE(c.sent.size() == 10);

    // Segments 0 and 5 are lost.
    TimeNs now = us(100);
    for (int i = 1; i < 10; ++i) {
        if (i == 5) continue;
        snd.on_ack(ack_of(rcv.on_data(c.sent[i])), now += us(10), c);
    }
    REQUIRE(snd.retransmits() == 1);  // fast retransmit of segment 0

    // Deliver the retransmission: the cumulative ack stops at the second
    // hole, which must be resent immediately without new dup acks.
    std::size_t idx = 0;
    for (std::size_t i = 10; i < c.sent.size(); ++i)
        if (c.sent[i].retransmit) idx = i;
    std::uint64_t a = rcv.on_data(c.sent[idx]);
    CHECK(a == 5 * 1460);
    const std::size_t before = c.sent.size();
    snd.on_ack(ack_of(a), now += us(10), c);
    CHECK(snd.retransmits() == 2);
    bool resent_hole = false;
    for (std::size_t i = before; i < c.sent.size(); ++i)
        if (c.sent[i].retransmit && c.sent[i].seq == 5 * 1460) resent_hole = true;
    CHECK(resent_hole);

    // Finishing the recovery leaves a clean sender.
    for (std::size_t i = before; i < c.sent.size(); ++i)
        if (c.sent[i].retransmit) a = rcv.on_data(c.sent[i]);
    snd.on_ack(ack_of(a), now += us(10), c);
    CHECK(rcv.rcv_next() == 10 * 1460);
    CHECK(rcv.reorder_events() == 0);
    CHECK(snd.timeouts() == 0);
}

TEST_CASE("retransmission timeout goes back N with exponential backoff") {
    TcpParams p;
    TcpSender snd(1, 5 * 1460, p);
    Collector c;
    snd.start(0, c);
    REQUIRE(c.sent.size() == 5);
    CHECK(snd.rto_deadline() == p.min_rto);

    // A stale generation must not fire.
    const std::uint64_t gen = snd.rto_generation();
    snd.on_rto(gen - 1, p.min_rto, c);
    CHECK(snd.timeouts() == 0);

    // Everything was lost; the timer fires.
    snd.on_rto(gen, p.min_rto, c);
    CHECK(snd.timeouts() == 1);
    CHECK(snd.cwnd() == 1460);
    CHECK(snd.ssthresh() == 5 * 1460 / 2);
    REQUIRE(c.sent.size() == 6);
    CHECK(c.sent[5].seq == 0);  // go-back-N restarts at the ack point
    CHECK(c.sent[5].retransmit);
    CHECK(snd.rto_deadline() == p.min_rto + 2 * p.min_rto);  // doubled

    snd.on_rto(snd.rto_generation(), 3 * p.min_rto, c);
    CHECK(snd.timeouts() == 2);
    CHECK(snd.rto_deadline() == 3 * p.min_rto + 4 * p.min_rto);

    // Backoff saturates at the ceiling.
    for (int i = 0; i < 12; ++i)
        snd.on_rto(snd.rto_generation(), ms(50) * (i + 1), c);
    CHECK(snd.rto_deadline() <= ms(50) * 12 + p.max_rto);
}

TEST_CASE("rtt estimator arms the timer from measured samples") {
    TcpParams p;
    TcpSender snd(1, 2 * 1460, p);
    TcpReceiver rcv(2 * 1460);
    Collector c;
    snd.start(0, c);
    REQUIRE(c.sent.size() == 2);

    // First sample 500us: srtt 500, rttvar 250, rto 500 + 1000 = 1.5ms.
    snd.on_ack(ack_of(rcv.on_data(c.sent[0])), us(500), c);
    CHECK(snd.rto_deadline() == us(500) + us(1500));

    snd.on_ack(ack_of(rcv.on_data(c.sent[1])), us(900), c);
    CHECK(snd.complete());
    CHECK(snd.finish_time() == us(900));
}

TEST_CASE("karn: no rtt sample from retransmitted segments") {
    TcpParams p;
    TcpSender snd(1, 2 * 1460, p);
    Collector c;
    snd.start(0, c);
    REQUIRE(c.sent.size() == 2);
    snd.on_rto(snd.rto_generation(), p.min_rto, c);  // go back, resend seq 0
    REQUIRE(c.sent.size() == 3);
    CHECK(c.sent[2].retransmit);

    // The ack for the retransmitted range arrives very late. A naive
    // estimator would take a 50ms sample; Karn suppression keeps the
    // backed-off 2ms timer instead.
    snd.on_ack(ack_of(1460), ms(50), c);
    CHECK_FALSE(snd.complete());
    CHECK(snd.rto_deadline() == ms(50) + 2 * p.min_rto);

    snd.on_ack(ack_of(2 * 1460), ms(51), c);
    CHECK(snd.complete());
}

TEST_CASE("sender guards") {
    TcpParams p;
    CHECK_THROWS_AS(TcpSender(1, 0, p), std::invalid_argument);
    CHECK_THROWS_AS(TcpSender(1, -5, p), std::invalid_argument);

    TcpSender snd(1, 1000, p);
    Collector c;
    snd.on_ack(ack_of(0), 0, c);  // before start: ignored
    CHECK(c.sent.empty());
    snd.start(0, c);
    CHECK_THROWS_AS(snd.start(0, c), std::logic_error);
    CHECK_THROWS_AS(snd.on_ack(data_of(0, 10), 0, c), std::logic_error);

    // Acks below the high-water mark are pure noise.
    TcpSender big(1, 100 * 1460, p);
    Collector cb;
    big.start(0, cb);
    TcpReceiver rcv(100 * 1460);
    rcv.on_data(cb.sent[0]);
    rcv.on_data(cb.sent[1]);
    big.on_ack(ack_of(2 * 1460), us(50), cb);
    const std::size_t n = cb.sent.size();
    for (int i = 0; i < 5; ++i) big.on_ack(ack_of(1460), us(60) + i, cb);
    CHECK(cb.sent.size() == n);  // no dup-ack machinery on stale acks
    CHECK(big.retransmits() == 0);
}
