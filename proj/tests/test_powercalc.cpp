#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "loadsig/error.hpp"
#include "loadsig/powercalc.hpp"
#include "loadsig/rng.hpp"

using namespace loadsig;
using Catch::Approx;

namespace {

struct Tone {
    int order;
    double rms;
    double phase;  // radians, cosine reference
};

// Frame built sample by sample from explicit cosines.
WaveformFrame make_frame(double v_rms, const std::vector<Tone>& tones, int ppc = 256, int cycles = 6) {
    WaveformFrame f;
    f.points_per_cycle = ppc;
    f.n_cycles = cycles;
    for (int c = 0; c < cycles; ++c) {
        for (int i = 0; i < ppc; ++i) {
            const double th = 2.0 * std::numbers::pi * i / ppc;
            f.voltage.push_back(std::sqrt(2.0) * v_rms * std::cos(th));
            double cur = 0.0;
            for (const auto& t : tones) cur += std::sqrt(2.0) * t.rms * std::cos(t.order * th + t.phase);
            f.current.push_back(cur);
        }
    }
    return f;
}

// Time-domain oracles: P = <v i>, Q = <v(theta - 90 deg) i>.
double oracle_p(const WaveformFrame& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.voltage.size(); ++i) acc += f.voltage[i] * f.current[i];
    return acc / static_cast<double>(f.voltage.size());
}

double oracle_q(const WaveformFrame& f) {
    const int n = f.points_per_cycle;
    double acc = 0.0;
    for (int c = 0; c < f.n_cycles; ++c) {
        const auto v = f.voltage_cycle(c);
        const auto i = f.current_cycle(c);
        for (int k = 0; k < n; ++k) acc += v[(k - n / 4 + n) % n] * i[k];
    }
    return acc / static_cast<double>(f.voltage.size());
}

}  // namespace

TEST_CASE("THD of the 3-4-5 spectrum is one half") {
    HarmonicVector h;
    h.set(1, 10.0);
    h.set(3, 3.0);
    h.set(5, 4.0);
    CHECK(std::abs(compute_thd(h) - 0.5) <= 1e-12);
}

TEST_CASE("THD ignores nothing below order 11 and is scale free") {
    HarmonicVector h;
    h.set(1, 2.0);
    h.set(3, 0.1);
    h.set(5, 0.2);
    h.set(7, 0.3);
    h.set(9, 0.4);
    const double expect = std::sqrt(0.01 + 0.04 + 0.09 + 0.16) / 2.0;
    CHECK(compute_thd(h) == Approx(expect).epsilon(1e-14));
    for (auto& m : h.magnitudes) m *= 7.5;
    CHECK(compute_thd(h) == Approx(expect).epsilon(1e-14));
}

TEST_CASE("THD with no fundamental is a domain error") {
    HarmonicVector h;
    h.set(3, 1.0);
    try {
        compute_thd(h);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
    }
    CHECK_THROWS_AS(harmonic_index(2), Error);
    CHECK_THROWS_AS(harmonic_index(11), Error);
}

TEST_CASE("harmonic magnitudes are recovered from a sampled frame") {
    const auto f = make_frame(120.0, {{1, 8.0, -0.4}, {3, 1.5, 0.3}, {5, 0.9, 1.2}, {7, 0.4, -2.0}, {9, 0.2, 0.1}});
    const auto h = extract_harmonics(f);
    CHECK(h.magnitude(1) == Approx(8.0).epsilon(1e-9));
    CHECK(h.magnitude(3) == Approx(1.5).epsilon(1e-9));
    CHECK(h.magnitude(5) == Approx(0.9).epsilon(1e-9));
    CHECK(h.magnitude(7) == Approx(0.4).epsilon(1e-9));
    CHECK(h.magnitude(9) == Approx(0.2).epsilon(1e-9));
    CHECK(h.fundamental_phase == Approx(-0.4).margin(1e-9));
    CHECK(compute_thd(h) == Approx(std::sqrt(1.5 * 1.5 + 0.81 + 0.16 + 0.04) / 8.0).epsilon(1e-9));
}

TEST_CASE("P and Q match time-domain oracles") {
    Rng rng(3, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const double i1 = rng.uniform(0.1, 40.0);
        const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
        std::vector<Tone> tones{{1, i1, phi}};
        for (int k : {3, 5, 7, 9}) tones.push_back({k, rng.uniform(0.0, 0.5) * i1, rng.uniform(-3.0, 3.0)});
        const auto f = make_frame(rng.uniform(100.0, 130.0), tones);
        const auto pq = compute_pq(f);
        const double scale = 120.0 * i1;
        CHECK(std::abs(pq.p - oracle_p(f)) <= 1e-9 * scale);
        CHECK(std::abs(pq.q - oracle_q(f)) <= 1e-9 * scale);
    }
}

TEST_CASE("lagging current gives positive Q and harmonics carry no power") {
    // 1 kW / 500 var lagging at 120 V.
    const double s = std::hypot(1000.0, 500.0);
    const double phi = std::atan2(500.0, 1000.0);
    const auto clean = make_frame(120.0, {{1, s / 120.0, -phi}});
    const auto dirty = make_frame(120.0, {{1, s / 120.0, -phi}, {3, 3.0, 0.7}, {5, 2.0, -1.1}});
    for (const auto* f : {&clean, &dirty}) {
        const auto pq = compute_pq(*f);
        CHECK(pq.p == Approx(1000.0).epsilon(1e-9));
        CHECK(pq.q == Approx(500.0).epsilon(1e-9));
    }
}

TEST_CASE("spectra subtract to the switched load") {
    CurrentSpectrum before, load;
    before.phasors[0] = {2.0, -0.5};
    before.phasors[1] = {0.1, 0.05};
    load.phasors[0] = {6.0, -2.0};
    load.phasors[1] = {0.9, -0.3};
    load.phasors[2] = {0.0, 0.4};
    auto after = before;
    after += load;
    FrameSynthesis a, b;
    a.current = before;
    b.current = after;
    auto diff = current_spectrum(synthesize_frame(b));
    diff -= current_spectrum(synthesize_frame(a));
    for (std::size_t k = 0; k < load.phasors.size(); ++k) {
        CHECK(std::abs(diff.phasors[k] - load.phasors[k]) <= 1e-9);
    }
    const double oracle = std::sqrt(std::norm(load.phasors[1]) + std::norm(load.phasors[2])) / std::abs(load.phasors[0]);
    CHECK(compute_thd(diff) == Approx(oracle).epsilon(1e-9));
}

TEST_CASE("synthesized frames agree with the explicit cosine builder") {
    FrameSynthesis spec;
    spec.voltage_rms = 118.0;
    spec.current.phasors[0] = std::polar(5.0, -0.3);
    spec.current.phasors[3] = std::polar(0.6, 1.0);
    const auto f = synthesize_frame(spec);
    const auto g = make_frame(118.0, {{1, 5.0, -0.3}, {7, 0.6, 1.0}});
    REQUIRE(f.current.size() == g.current.size());
    for (std::size_t i = 0; i < f.current.size(); ++i) {
        CHECK(f.voltage[i] == Approx(g.voltage[i]).margin(1e-9));
        CHECK(f.current[i] == Approx(g.current[i]).margin(1e-9));
    }
}

TEST_CASE("degenerate and malformed frames") {
    SECTION("all-zero current") {
        const auto f = make_frame(120.0, {});
        const auto h = extract_harmonics(f);
        CHECK(h.degenerate);
        const auto pq = compute_pq(f);
        CHECK(pq.p == 0.0);
        CHECK(pq.q == 0.0);
    }
    SECTION("no voltage") {
        auto f = make_frame(120.0, {{1, 2.0, 0.0}});
        std::fill(f.voltage.begin(), f.voltage.end(), 0.0);
        try {
            compute_pq(f);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Data);
            CHECK(std::string(e.what()).find("no reference voltage") != std::string::npos);
        }
    }
    SECTION("shape") {
        auto f = make_frame(120.0, {{1, 2.0, 0.0}});
        f.current.pop_back();
        CHECK_THROWS_AS(f.validate(), Error);
        auto g = make_frame(120.0, {{1, 2.0, 0.0}}, 16, 2);
        CHECK_THROWS_AS(g.validate(), Error);
    }
}
