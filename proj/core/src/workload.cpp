#include "fdsim/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fdsim/random.hpp"

namespace fdsim {

SizeCdf SizeCdf::from_points(std::vector<CdfPoint> pts) {
    if (pts.size() < 2) throw std::runtime_error("cdf needs at least 2 points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!(p.size_bytes >= 1))
            throw std::runtime_error("cdf sizes must be >= 1 byte");
        if (p.cum_prob < 0 || p.cum_prob > 1)
            throw std::runtime_error("cdf probabilities must be in [0,1]");
        if (i > 0) {
            if (!(p.size_bytes > pts[i - 1].size_bytes))
                throw std::runtime_error("cdf sizes must be strictly increasing");
            if (p.cum_prob < pts[i - 1].cum_prob)
                throw std::runtime_error("cdf probabilities must not decrease");
        }
    }
    if (pts.back().cum_prob != 1.0)
        throw std::runtime_error("cdf must end at probability 1.0");
    SizeCdf c;
    c.pts_ = std::move(pts);
    return c;
}

SizeCdf SizeCdf::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cdf file: " + path);
    std::vector<CdfPoint> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped;
        for (char ch : line)
            if (!isspace(static_cast<unsigned char>(ch))) stripped += ch;
        if (stripped.empty() || stripped[0] == '#') continue;
        std::replace(stripped.begin(), stripped.end(), ',', ' ');
        std::istringstream is(stripped);
        CdfPoint p;
        if (!(is >> p.size_bytes >> p.cum_prob))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'size_bytes,cum_prob'");
        pts.push_back(p);
    }
    try {
        return from_points(std::move(pts));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::int64_t SizeCdf::sample(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (u <= pts_.front().cum_prob)
        return static_cast<std::int64_t>(std::llround(pts_.front().size_bytes));
    // First knot with cum_prob >= u; interpolate from its predecessor.
    std::size_t lo = 0, hi = pts_.size() - 1;
    while (lo + 1 < hi) {
        std::size_t mid = (lo + hi) / 2;
        (pts_[mid].cum_prob >= u ? hi : lo) = mid;
    }
    const CdfPoint& a = pts_[lo];
    const CdfPoint& b = pts_[hi];
    double size = b.size_bytes;
    if (b.cum_prob > a.cum_prob) {
        double f = (u - a.cum_prob) / (b.cum_prob - a.cum_prob);
        size = a.size_bytes + f * (b.size_bytes - a.size_bytes);
    }
    return std::max<std::int64_t>(1, std::llround(size));
}

double SizeCdf::mean_bytes() const {
    double mean = pts_.front().size_bytes * pts_.front().cum_prob;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
        double mass = pts_[i].cum_prob - pts_[i - 1].cum_prob;
        mean += mass * (pts_[i].size_bytes + pts_[i - 1].size_bytes) / 2.0;
    }
    return mean;
}

std::vector<FlowArrival> generate_arrivals(const LoadSpec& spec,
                                           const SizeCdf& cdf,
                                           TimeNs duration,
                                           std::int64_t host_link_bps) {
    if (spec.load_fraction <= 0 || spec.load_fraction > 1.0)
        throw std::invalid_argument("load_fraction must be in (0,1]");
    if (spec.connections_per_client != std::lround(spec.load_fraction * 10))
        throw std::invalid_argument(
            "connections_per_client must equal round(load_fraction * 10)");
    if (spec.client_hosts.empty() || spec.server_hosts.empty())
        throw std::invalid_argument("need client and server hosts");
    if (duration <= 0) throw std::invalid_argument("duration must be positive");

    // Per generator: one tenth of the line rate. Flow think time is then
    // mean_size / rate so each connection offers its slice in expectation.
    const double gen_rate_Bps =
        host_link_bps / 8.0 * spec.load_fraction / spec.connections_per_client;
    const double mean_gap_sec = cdf.mean_bytes() / gen_rate_Bps;

    std::vector<FlowArrival> out;
    for (std::size_t ci = 0; ci < spec.client_hosts.size(); ++ci) {
        for (int k = 0; k < spec.connections_per_client; ++k) {
            Rng rng(mix_u64(spec.seed, mix_u64(ci, 0x9d2c5680u + k)));
            double t_sec = 0;
            while (true) {
                t_sec += rng.next_exponential(mean_gap_sec);
                const auto t = static_cast<TimeNs>(t_sec * 1e9);
                if (t >= duration) break;
                FlowArrival f;
                f.start = t;
                f.src_host = spec.client_hosts[ci];
                f.dst_host = spec.server_hosts[rng.next_below(
                    spec.server_hosts.size())];
                f.bytes = cdf.sample(rng.next_double());
                out.push_back(f);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FlowArrival& a, const FlowArrival& b) {
                         if (a.start != b.start) return a.start < b.start;
                         if (a.src_host != b.src_host) return a.src_host < b.src_host;
                         if (a.dst_host != b.dst_host) return a.dst_host < b.dst_host;
                         return a.bytes < b.bytes;
                     });
    return out;
}

std::string arrivals_to_csv(const std::vector<FlowArrival>& v) {
    std::ostringstream os;
    os << "start_ns,src_host,dst_host,bytes\n";
    for (const auto& f : v)
        os << f.start << ',' << f.src_host << ',' << f.dst_host << ','
           << f.bytes << '\n';
    return os.str();
}

std::vector<FlowArrival> arrivals_from_csv(const std::string& text) {
    std::vector<FlowArrival> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.rfind("start_ns", 0) == 0) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        FlowArrival f;
        if (!(is >> f.start >> f.src_host >> f.dst_host >> f.bytes))
            throw std::runtime_error("flow list line " + std::to_string(lineno) +
                                     ": expected start_ns,src,dst,bytes");
        out.push_back(f);
    }
    return out;
}

}  // namespace fdsim
