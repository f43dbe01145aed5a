#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "fdsim/codec.hpp"
#include "fdsim/time.hpp"

namespace fdsim {

struct TcpParams {
    int mss = 1460;
    std::int64_t rwnd = 65535;  // classic no-scaling receive window
    int init_cwnd_mss = 10;
    TimeNs min_rto = ms(1);
    TimeNs max_rto = ms(100);
};

// One simulated segment, data or ACK. wire_bytes is maintained by the
// forwarding layer as headers are attached and stripped. `retransmit` is
// simulator metadata: it never exists on a real wire and exists so the
// receiver can tell genuine path reordering from loss recovery.
struct Segment {
    std::uint32_t flow = 0;
    bool is_ack = false;
    std::uint64_t seq = 0;       // first payload byte
    std::uint32_t length = 0;    // payload bytes, 0 for pure ACKs
    std::uint64_t ack_seq = 0;   // cumulative, valid when is_ack
    bool retransmit = false;
    bool has_gap = false;
    GapHeader gap;
    TimeNs sent_time = 0;
};

// Payload plus framing, padded to the wire minimum.
std::int64_t segment_wire_bytes(const Segment& s);

class SegmentSink {
  public:
    virtual ~SegmentSink() = default;
    virtual void send(Segment&& s) = 0;
};

// Reno-flavored sender: slow start, AIMD congestion avoidance, triple
// duplicate ACK fast retransmit with partial-ACK retransmission, and a
// go-back-N RTO with exponential backoff. No handshake or teardown: the
// first packet on the wire is data, a one-MSS flow is one data segment
// and one ACK.
class TcpSender {
  public:
    TcpSender(std::uint32_t flow, std::int64_t size_bytes, const TcpParams& p);

    void start(TimeNs now, SegmentSink& out);
    void on_ack(const Segment& ack, TimeNs now, SegmentSink& out);
    // Fires only when `generation` matches the current arm count.
    void on_rto(std::uint64_t generation, TimeNs now, SegmentSink& out);

    bool complete() const { return complete_; }
    TimeNs finish_time() const { return finish_time_; }
    std::int64_t retransmits() const { return retransmits_; }
    std::int64_t segments_sent() const { return segments_sent_; }
    std::int64_t timeouts() const { return timeouts_; }

    // kTimeInf when no timer should be armed. The simulation reconciles
    // its timer event with this after every sender interaction.
    TimeNs rto_deadline() const { return rto_deadline_; }
    std::uint64_t rto_generation() const { return rto_generation_; }

    std::int64_t cwnd() const { return cwnd_; }
    std::int64_t ssthresh() const { return ssthresh_; }

  private:
    void transmit(std::uint64_t seq, std::uint32_t len, TimeNs now,
                  SegmentSink& out);
    void send_available(TimeNs now, SegmentSink& out);
    void arm_rto(TimeNs now);
    std::uint32_t segment_len(std::uint64_t seq) const;
    std::int64_t flight_size() const {
        return static_cast<std::int64_t>(max_sent_ - highest_acked_);
    }

    std::uint32_t flow_;
    std::int64_t size_;
    TcpParams p_;

    std::uint64_t next_seq_ = 0;      // next new byte to send
    std::uint64_t max_sent_ = 0;      // high water mark of sent bytes
    std::uint64_t highest_acked_ = 0;
    std::int64_t cwnd_ = 0;
    std::int64_t ssthresh_ = 0;
    int dup_acks_ = 0;
    bool in_recovery_ = false;
    std::uint64_t recovery_point_ = 0;
    bool started_ = false;
    bool complete_ = false;
    TimeNs finish_time_ = -1;

    // RFC 6298 style smoothed estimator, integer ns.
    TimeNs srtt_ = 0;
    TimeNs rttvar_ = 0;
    TimeNs rto_ = 0;
    TimeNs rto_deadline_ = kTimeInf;
    std::uint64_t rto_generation_ = 0;
    int backoff_ = 0;

    std::map<std::uint64_t, TimeNs> clean_sent_;  // seg end -> first send time
    std::int64_t retransmits_ = 0;
    std::int64_t segments_sent_ = 0;
    std::int64_t timeouts_ = 0;
};

// Cumulative-ACK receiver with out-of-order buffering. A reorder event
// is a non-retransmitted data segment that contributes at least one new
// byte below the highest byte already received; that stays zero whenever
// a flow's packets follow one fixed path, losses or not.
class TcpReceiver {
  public:
    explicit TcpReceiver(std::int64_t expected_bytes)
        : expected_(expected_bytes) {}

    // Consumes a data segment and returns the cumulative ACK to send.
    std::uint64_t on_data(const Segment& s);

    std::uint64_t rcv_next() const { return rcv_next_; }
    std::int64_t delivered_bytes() const { return delivered_; }
    std::int64_t reorder_events() const { return reorders_; }
    std::int64_t duplicate_segments() const { return duplicates_; }
    bool complete() const {
        return expected_ >= 0 && delivered_ >= expected_;
    }

  private:
    std::int64_t expected_;
    std::uint64_t rcv_next_ = 0;
    std::uint64_t max_end_ = 0;
    std::map<std::uint64_t, std::uint64_t> ooo_;  // start -> end
    std::int64_t delivered_ = 0;
    std::int64_t reorders_ = 0;
    std::int64_t duplicates_ = 0;
};

}  // namespace fdsim
