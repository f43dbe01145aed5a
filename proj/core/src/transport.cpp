#include "fdsim/transport.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fdsim {

std::int64_t segment_wire_bytes(const Segment& s) {
    std::int64_t w = kBaseHeaderBytes + s.length + (s.has_gap ? kGapHeaderBytes : 0);
    return std::max(w, kMinWireBytes);
}

TcpSender::TcpSender(std::uint32_t flow, std::int64_t size_bytes,
                     const TcpParams& p)
    : flow_(flow), size_(size_bytes), p_(p) {
    if (size_bytes <= 0) throw std::invalid_argument("flow size must be positive");
    cwnd_ = std::int64_t{p_.init_cwnd_mss} * p_.mss;
    ssthresh_ = std::numeric_limits<std::int64_t>::max() / 2;
    rto_ = p_.min_rto;
}

std::uint32_t TcpSender::segment_len(std::uint64_t seq) const {
    return static_cast<std::uint32_t>(
        std::min<std::int64_t>(p_.mss, size_ - static_cast<std::int64_t>(seq)));
}

void TcpSender::transmit(std::uint64_t seq, std::uint32_t len, TimeNs now,
                         SegmentSink& out) {
    Segment s;
    s.flow = flow_;
    s.seq = seq;
    s.length = len;
    s.retransmit = seq < max_sent_;
    s.sent_time = now;
    if (s.retransmit) {
        ++retransmits_;
        clean_sent_.erase(seq + len);  // Karn: no RTT sample from retransmits
    } else {
        clean_sent_.emplace(seq + len, now);
        max_sent_ = seq + len;
    }
    ++segments_sent_;
    out.send(std::move(s));
}

void TcpSender::send_available(TimeNs now, SegmentSink& out) {
    const std::int64_t win = std::min(cwnd_, p_.rwnd);
    while (static_cast<std::int64_t>(next_seq_) < size_) {
        const std::uint32_t len = segment_len(next_seq_);
        const auto inflight =
            static_cast<std::int64_t>(next_seq_ - highest_acked_);
        if (inflight + len > win) break;
        transmit(next_seq_, len, now, out);
        next_seq_ += len;
    }
}

void TcpSender::arm_rto(TimeNs now) {
    ++rto_generation_;
    rto_deadline_ = now + rto_;
}

void TcpSender::start(TimeNs now, SegmentSink& out) {
    if (started_) throw std::logic_error("sender started twice");
    started_ = true;
    send_available(now, out);
    arm_rto(now);
}

void TcpSender::on_ack(const Segment& ack, TimeNs now, SegmentSink& out) {
    if (!ack.is_ack) throw std::logic_error("on_ack fed a data segment");
    if (complete_ || !started_) return;
    const std::uint64_t a = ack.ack_seq;

    if (a > highest_acked_) {
        // RTT sample from the newest cleanly acked segment.
        std::optional<TimeNs> sample;
        for (auto it = clean_sent_.begin();
             it != clean_sent_.end() && it->first <= a;) {
            sample = now - it->second;
            it = clean_sent_.erase(it);
        }
        if (sample) {
            if (srtt_ == 0) {
                srtt_ = *sample;
                rttvar_ = *sample / 2;
            } else {
                const TimeNs dev =
                    srtt_ > *sample ? srtt_ - *sample : *sample - srtt_;
                rttvar_ = (3 * rttvar_ + dev) / 4;
                srtt_ = (7 * srtt_ + *sample) / 8;
            }
            rto_ = std::clamp(srtt_ + std::max<TimeNs>(4 * rttvar_, us(100)),
                              p_.min_rto, p_.max_rto);
        }

        highest_acked_ = a;
        dup_acks_ = 0;
        backoff_ = 0;

        if (in_recovery_) {
            if (a >= recovery_point_) {
                in_recovery_ = false;
                cwnd_ = ssthresh_;
            } else {
                // Partial ACK: the next hole is lost too, resend it now.
                transmit(a, segment_len(a), now, out);
            }
        } else if (cwnd_ < ssthresh_) {
            cwnd_ += p_.mss;
        } else {
            cwnd_ += std::max<std::int64_t>(
                1, std::int64_t{p_.mss} * p_.mss / cwnd_);
        }

        if (static_cast<std::int64_t>(a) >= size_) {
            complete_ = true;
            finish_time_ = now;
            rto_deadline_ = kTimeInf;
            ++rto_generation_;
            return;
        }
        send_available(now, out);
        arm_rto(now);
        return;
    }

    if (a == highest_acked_) {
        ++dup_acks_;
        if (!in_recovery_ && dup_acks_ == 3) {
            ssthresh_ = std::max<std::int64_t>(flight_size() / 2, 2 * p_.mss);
            in_recovery_ = true;
            recovery_point_ = max_sent_;
            transmit(a, segment_len(a), now, out);
            cwnd_ = ssthresh_ + 3 * p_.mss;
            arm_rto(now);
        } else if (in_recovery_) {
            cwnd_ += p_.mss;
            send_available(now, out);
        }
    }
    // Acks below highest_acked_ carry no information here.
}

void TcpSender::on_rto(std::uint64_t generation, TimeNs now, SegmentSink& out) {
    if (complete_ || generation != rto_generation_) return;
    ++timeouts_;
    ssthresh_ = std::max<std::int64_t>(flight_size() / 2, 2 * p_.mss);
    cwnd_ = p_.mss;
    dup_acks_ = 0;
    in_recovery_ = false;
    next_seq_ = highest_acked_;  // go back N
    ++backoff_;
    rto_ = std::min(rto_ * 2, p_.max_rto);
    send_available(now, out);
    arm_rto(now);
}

std::uint64_t TcpReceiver::on_data(const Segment& s) {
    if (s.is_ack || s.length == 0) return rcv_next_;
    const std::uint64_t b = s.seq;
    const std::uint64_t e = s.seq + s.length;

    // Count bytes this segment adds that no earlier arrival covered.
    std::uint64_t fresh = 0;
    {
        std::uint64_t cur = std::max(b, rcv_next_);
        auto it = ooo_.upper_bound(cur);
        if (it != ooo_.begin()) {
            auto pv = std::prev(it);
            if (pv->second > cur) cur = pv->second;
        }
        while (cur < e) {
            if (it == ooo_.end() || it->first >= e) {
                fresh += e - cur;
                break;
            }
            if (it->first > cur) fresh += it->first - cur;
            cur = std::max(cur, it->second);
            ++it;
        }
    }
    if (fresh == 0) {
        ++duplicates_;
        return rcv_next_;
    }
    if (!s.retransmit && b < max_end_) ++reorders_;
    max_end_ = std::max(max_end_, e);
    delivered_ += static_cast<std::int64_t>(fresh);

    std::uint64_t nb = std::max(b, rcv_next_);
    std::uint64_t ne = e;
    auto it = ooo_.upper_bound(nb);
    if (it != ooo_.begin()) {
        auto pv = std::prev(it);
        if (pv->second >= nb) {
            nb = pv->first;
            ne = std::max(ne, pv->second);
            it = ooo_.erase(pv);
        }
    }
    while (it != ooo_.end() && it->first <= ne) {
        ne = std::max(ne, it->second);
        it = ooo_.erase(it);
    }
    ooo_[nb] = ne;

    while (!ooo_.empty() && ooo_.begin()->first <= rcv_next_) {
        rcv_next_ = std::max(rcv_next_, ooo_.begin()->second);
        ooo_.erase(ooo_.begin());
    }
    return rcv_next_;
}

}  // namespace fdsim
