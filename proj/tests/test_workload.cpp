#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "fdsim/random.hpp"
#include "fdsim/workload.hpp"

using namespace fdsim;

namespace {

SizeCdf two_knots() {
    return SizeCdf::from_points({{100, 0.5}, {200, 1.0}});
}

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = "wl_" + name;
    std::ofstream out(path);
    out << text;
    out.close();
    return path;
}

}  // namespace

TEST_CASE("cdf validation") {
    using P = std::vector<CdfPoint>;
    CHECK_THROWS_AS(SizeCdf::from_points(P{{100, 1.0}}), std::runtime_error);
    CHECK_THROWS_AS(SizeCdf::from_points(P{{0.5, 0.0}, {10, 1.0}}), std::runtime_error);
    CHECK_THROWS_AS(SizeCdf::from_points(P{{1, -0.1}, {10, 1.0}}), std::runtime_error);
    CHECK_THROWS_AS(SizeCdf::from_points(P{{1, 0.0}, {10, 1.5}}), std::runtime_error);
    CHECK_THROWS_AS(SizeCdf::from_points(P{{10, 0.0}, {10, 1.0}}), std::runtime_error);
    CHECK_THROWS_AS(SizeCdf::from_points(P{{1, 0.5}, {10, 0.4}, {20, 1.0}}),
                    std::runtime_error);
    CHECK_THROWS_AS(SizeCdf::from_points(P{{1, 0.0}, {10, 0.9}}), std::runtime_error);
    CHECK_NOTHROW(SizeCdf::from_points(P{{1, 0.0}, {10, 0.5}, {20, 1.0}}));
}

TEST_CASE("inverse transform: atom at the first knot, linear between") {
    SizeCdf cdf = two_knots();
    CHECK(cdf.sample(0.0) == 100);
    CHECK(cdf.sample(0.3) == 100);
    CHECK(cdf.sample(0.5) == 100);   // atom absorbs everything up to its mass
    CHECK(cdf.sample(0.75) == 150);
    CHECK(cdf.sample(1.0) == 200);
    CHECK(cdf.sample(-3.0) == 100);  // clamped
    CHECK(cdf.sample(7.0) == 200);

    // Flat segments carry no mass: interpolation resumes at their right end.
    SizeCdf flat = SizeCdf::from_points({{100, 0.5}, {200, 0.5}, {300, 1.0}});
    CHECK(flat.sample(0.5) == 100);
    CHECK(flat.sample(0.6) == 220);
    CHECK(flat.sample(0.75) == 250);

    // Samples never drop below one byte and stay monotone in u.
    SizeCdf tiny = SizeCdf::from_points({{1, 0.0}, {2, 1.0}});
    CHECK(tiny.sample(0.0) >= 1);
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.next_double(), b = rng.next_double();
        const auto sa = cdf.sample(a), sb = cdf.sample(b);
        if (a <= b) CHECK(sa <= sb);
        else CHECK(sb <= sa);
    }
}

TEST_CASE("analytic mean matches a monte carlo estimate") {
    SizeCdf cdf = two_knots();
    CHECK(cdf.mean_bytes() == doctest::Approx(100 * 0.5 + 0.5 * 150).epsilon(1e-12));

    Rng rng(24);
    double acc = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) acc += static_cast<double>(cdf.sample(rng.next_double()));
    CHECK(acc / n == doctest::Approx(cdf.mean_bytes()).epsilon(0.01));
}

TEST_CASE("bundled web-search distribution") {
    SizeCdf cdf = SizeCdf::load_csv(std::string(FDSIM_DATA_DIR) + "/web-search.csv");
    REQUIRE(cdf.points().size() == 12);
    CHECK(cdf.points().front().size_bytes == 1);
    CHECK(cdf.points().back().size_bytes == 30e6);
    CHECK(cdf.points().back().cum_prob == 1.0);

    // Independently accumulated trapezoid mean.
    double mean = cdf.points().front().size_bytes * cdf.points().front().cum_prob;
    for (std::size_t i = 1; i < cdf.points().size(); ++i)
        mean += (cdf.points()[i].cum_prob - cdf.points()[i - 1].cum_prob) *
                (cdf.points()[i].size_bytes + cdf.points()[i - 1].size_bytes) / 2;
    CHECK(cdf.mean_bytes() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(cdf.mean_bytes() == doctest::Approx(1'711'250.075).epsilon(1e-9));

    Rng rng(5);
    double acc = 0;
    int mice = 0, elephants = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        const auto s = cdf.sample(rng.next_double());
        acc += static_cast<double>(s);
        mice += s < 100'000;
        elephants += s > 10'000'000;
    }
    CHECK(acc / n == doctest::Approx(cdf.mean_bytes()).epsilon(0.01));
    // F(100KB) interpolates to 0.53 + 0.07/6; F(10MB) = 0.97.
    CHECK(static_cast<double>(mice) / n == doctest::Approx(0.5417).epsilon(0.01));
    CHECK(static_cast<double>(elephants) / n == doctest::Approx(0.03).epsilon(0.05));
}

TEST_CASE("bundled data-mining distribution is mice-heavy with huge tails") {
    SizeCdf cdf = SizeCdf::load_csv(std::string(FDSIM_DATA_DIR) + "/data-mining.csv");
    REQUIRE(cdf.points().size() == 11);
    CHECK(cdf.points().back().size_bytes == 1e9);
    CHECK(cdf.mean_bytes() == doctest::Approx(12'980'975.25).epsilon(1e-9));

    Rng rng(6);
    int mice = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i)
        mice += cdf.sample(rng.next_double()) < 100'000;
    CHECK(static_cast<double>(mice) / n == doctest::Approx(0.80).epsilon(0.01));
}

TEST_CASE("cdf csv parsing: comments, blanks, spacing, errors") {
    const std::string good = write_temp("good.csv",
                                        "# header comment\n"
                                        "\n"
                                        "  1 , 0.0\n"
                                        "100,0.5\n"
                                        "\t200 ,\t1.0\n");
    SizeCdf cdf = SizeCdf::load_csv(good);
    CHECK(cdf.points().size() == 3);
    CHECK(cdf.sample(1.0) == 200);
    std::remove(good.c_str());

    CHECK_THROWS_AS(SizeCdf::load_csv("does_not_exist.csv"), std::runtime_error);

    const std::string bad = write_temp("bad.csv", "1,0.0\npotato\n");
    CHECK_THROWS_WITH_AS(SizeCdf::load_csv(bad),
                         (bad + ":2: expected 'size_bytes,cum_prob'").c_str(),
                         std::runtime_error);
    std::remove(bad.c_str());

    const std::string incomplete = write_temp("incomplete.csv", "1,0.0\n9,0.9\n");
    CHECK_THROWS_WITH_AS(SizeCdf::load_csv(incomplete),
                         (incomplete + ": cdf must end at probability 1.0").c_str(),
                         std::runtime_error);
    std::remove(incomplete.c_str());
}

TEST_CASE("arrival generation is validated") {
    SizeCdf cdf = two_knots();
    LoadSpec s;
    s.load_fraction = 0.5;
    s.connections_per_client = 5;
    s.client_hosts = {0, 1};
    s.server_hosts = {8, 9};

    LoadSpec bad = s;
    bad.load_fraction = 0;
    CHECK_THROWS_AS(generate_arrivals(bad, cdf, ms(1), 10'000'000'000),
                    std::invalid_argument);
    bad = s;
    bad.load_fraction = 1.2;
    CHECK_THROWS_AS(generate_arrivals(bad, cdf, ms(1), 10'000'000'000),
                    std::invalid_argument);
    bad = s;
    bad.connections_per_client = 4;  // inconsistent with load 0.5
    CHECK_THROWS_AS(generate_arrivals(bad, cdf, ms(1), 10'000'000'000),
                    std::invalid_argument);
    bad = s;
    bad.client_hosts.clear();
    CHECK_THROWS_AS(generate_arrivals(bad, cdf, ms(1), 10'000'000'000),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_arrivals(s, cdf, 0, 10'000'000'000),
                    std::invalid_argument);
}

TEST_CASE("arrivals are deterministic, sorted, and load-calibrated") {
    SizeCdf cdf = SizeCdf::from_points({{100'000, 0.0}, {200'000, 1.0}});
    LoadSpec s;
    s.load_fraction = 0.5;
    s.connections_per_client = 5;
    s.seed = 77;
    for (int h = 0; h < 16; ++h) s.client_hosts.push_back(h);
    for (int h = 32; h < 64; ++h) s.server_hosts.push_back(h);
    const TimeNs duration = ms(500);
    const std::int64_t host_bps = 10'000'000'000;

    auto a = generate_arrivals(s, cdf, duration, host_bps);
    auto b = generate_arrivals(s, cdf, duration, host_bps);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].start == b[i].start);
        CHECK(a[i].src_host == b[i].src_host);
        CHECK(a[i].dst_host == b[i].dst_host);
        CHECK(a[i].bytes == b[i].bytes);
    }

    LoadSpec reseeded = s;
    reseeded.seed = 78;
    auto c = generate_arrivals(reseeded, cdf, duration, host_bps);
    bool differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].start != c[i].start || a[i].bytes != c[i].bytes;
    CHECK(differs);

    std::map<int, double> bytes_by_client;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) CHECK(a[i - 1].start <= a[i].start);
        CHECK(a[i].start > 0);
        CHECK(a[i].start < duration);
        CHECK(a[i].src_host < 16);
        CHECK(a[i].dst_host >= 32);
        CHECK(a[i].bytes >= 100'000);
        CHECK(a[i].bytes <= 200'000);
        bytes_by_client[a[i].src_host] += static_cast<double>(a[i].bytes);
    }
    CHECK(bytes_by_client.size() == 16);

    // Each client should offer load * line rate in expectation.
    const double expect =
        s.load_fraction * (host_bps / 8.0) * (to_sec(duration));
    double total = 0;
    for (auto& [h, v] : bytes_by_client) total += v;
    CHECK(total / 16 == doctest::Approx(expect).epsilon(0.03));
}

TEST_CASE("different connection counts give different processes") {
    SizeCdf cdf = two_knots();
    LoadSpec lo, hi;
    lo.load_fraction = 0.1;
    lo.connections_per_client = 1;
    hi.load_fraction = 0.9;
    hi.connections_per_client = 9;
    lo.client_hosts = hi.client_hosts = {0};
    lo.server_hosts = hi.server_hosts = {5};
    lo.seed = hi.seed = 3;

    auto a = generate_arrivals(lo, cdf, ms(10), 10'000'000'000);
    auto b = generate_arrivals(hi, cdf, ms(10), 10'000'000'000);
    CHECK(b.size() > a.size() * 5);  // nine generators vs one, 9x the rate
}

TEST_CASE("arrival csv round-trips") {
    std::vector<FlowArrival> v{{us(5), 1, 9, 1200}, {us(9), 0, 8, 99}};
    const std::string text = arrivals_to_csv(v);
    auto back = arrivals_from_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].start == us(5));
    CHECK(back[0].src_host == 1);
    CHECK(back[0].dst_host == 9);
    CHECK(back[0].bytes == 1200);
    CHECK(back[1].start == us(9));

    CHECK_THROWS_AS(arrivals_from_csv("start_ns,src_host,dst_host,bytes\nnope\n"),
                    std::runtime_error);
}
