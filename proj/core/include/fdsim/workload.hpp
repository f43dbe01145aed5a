#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdsim/time.hpp"

namespace fdsim {

struct CdfPoint {
    double size_bytes = 0;
    double cum_prob = 0;
};

// Piecewise-linear flow size distribution loaded from "size,prob" rows.
// Sizes must be strictly increasing and positive, probabilities
// non-decreasing from the first row up to exactly 1.0 at the last.
class SizeCdf {
  public:
    static SizeCdf from_points(std::vector<CdfPoint> pts);
    // Throws std::runtime_error naming the offending line on bad input.
    static SizeCdf load_csv(const std::string& path);

    // Inverse transform of u in [0,1], linear between knots, >= 1 byte.
    std::int64_t sample(double u) const;

    // Exact mean of the piecewise-linear distribution (with an atom at
    // the first knot when its probability is positive).
    double mean_bytes() const;

    const std::vector<CdfPoint>& points() const { return pts_; }

  private:
    std::vector<CdfPoint> pts_;
};

// One generator = one long-lived client connection issuing flows with
// exponential think gaps. connections_per_client scales offered load in
// tenths of the host line rate.
struct LoadSpec {
    double load_fraction = 0.5;       // of each client's host link
    int connections_per_client = 5;   // must equal round(load * 10)
    std::vector<int> client_hosts;
    std::vector<int> server_hosts;
    std::uint64_t seed = 1;
};

struct FlowArrival {
    TimeNs start = 0;
    int src_host = -1;
    int dst_host = -1;
    std::int64_t bytes = 0;
};

// Poisson arrivals per generator, calibrated so each client host offers
// load_fraction of host_link_bps in expectation. Deterministic in
// (spec.seed, generator index); the merged list is sorted by start time.
std::vector<FlowArrival> generate_arrivals(const LoadSpec& spec,
                                           const SizeCdf& cdf,
                                           TimeNs duration,
                                           std::int64_t host_link_bps);

std::string arrivals_to_csv(const std::vector<FlowArrival>& v);
std::vector<FlowArrival> arrivals_from_csv(const std::string& text);

}  // namespace fdsim
