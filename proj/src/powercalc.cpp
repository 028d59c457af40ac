#include "loadsig/powercalc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "loadsig/error.hpp"

namespace loadsig {

namespace {

using cplx = std::complex<double>;

// RMS phasor of harmonic `order` over one cycle of samples (cosine reference).
cplx cycle_phasor(std::span<const double> x, int order) {
    const auto n = static_cast<double>(x.size());
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double angle = -2.0 * std::numbers::pi * order * static_cast<double>(i) / n;
        acc += x[i] * cplx{std::cos(angle), std::sin(angle)};
    }
    return acc * (std::numbers::sqrt2 / n);
}

bool all_zero(std::span<const double> x) {
    for (double v : x) {
        if (v != 0.0) return false;
    }
    return true;
}

// Unit phasor of the voltage fundamental for one cycle.
cplx voltage_reference(const WaveformFrame& f, int c) {
    const cplx v1 = cycle_phasor(f.voltage_cycle(c), 1);
    const double mag = std::abs(v1);
    if (mag == 0.0) return cplx{1.0, 0.0};
    return v1 / mag;
}

}  // namespace

std::size_t harmonic_index(int order) {
    for (std::size_t i = 0; i < kHarmonicOrders.size(); ++i) {
        if (kHarmonicOrders[i] == order) return i;
    }
    throw Error(ErrorKind::Domain, "unsupported harmonic order " + std::to_string(order));
}

void WaveformFrame::validate() const {
    if (points_per_cycle < 32) {
        throw Error(ErrorKind::Data, "waveform frame needs at least 32 points per cycle, got " +
                                         std::to_string(points_per_cycle));
    }
    if (n_cycles < 1) throw Error(ErrorKind::Data, "waveform frame has no cycles");
    const auto expected = static_cast<std::size_t>(points_per_cycle) * static_cast<std::size_t>(n_cycles);
    if (voltage.size() != expected || current.size() != expected) {
        throw Error(ErrorKind::Data, "waveform frame voltage/current shape mismatch");
    }
    if (!(nominal_freq > 0.0)) throw Error(ErrorKind::Data, "waveform frame nominal frequency must be positive");
}

std::span<const double> WaveformFrame::voltage_cycle(int c) const {
    return std::span<const double>(voltage).subspan(static_cast<std::size_t>(c) * points_per_cycle,
                                                    static_cast<std::size_t>(points_per_cycle));
}

std::span<const double> WaveformFrame::current_cycle(int c) const {
    return std::span<const double>(current).subspan(static_cast<std::size_t>(c) * points_per_cycle,
                                                    static_cast<std::size_t>(points_per_cycle));
}

CurrentSpectrum& CurrentSpectrum::operator+=(const CurrentSpectrum& o) {
    for (std::size_t i = 0; i < phasors.size(); ++i) phasors[i] += o.phasors[i];
    return *this;
}

CurrentSpectrum& CurrentSpectrum::operator-=(const CurrentSpectrum& o) {
    for (std::size_t i = 0; i < phasors.size(); ++i) phasors[i] -= o.phasors[i];
    return *this;
}

CurrentSpectrum& CurrentSpectrum::operator*=(double k) {
    for (auto& p : phasors) p *= k;
    return *this;
}

HarmonicVector extract_harmonics(const WaveformFrame& frame) {
    frame.validate();
    HarmonicVector h;
    if (all_zero(frame.current)) {
        h.degenerate = true;
        return h;
    }
    cplx fundamental_rel{0.0, 0.0};
    for (int c = 0; c < frame.n_cycles; ++c) {
        const auto cur = frame.current_cycle(c);
        for (std::size_t k = 0; k < kHarmonicOrders.size(); ++k) {
            h.magnitudes[k] += std::abs(cycle_phasor(cur, kHarmonicOrders[k]));
        }
        fundamental_rel += cycle_phasor(cur, 1) * std::conj(voltage_reference(frame, c));
    }
    for (auto& m : h.magnitudes) m /= frame.n_cycles;
    h.fundamental_phase = std::abs(fundamental_rel) > 0.0 ? std::arg(fundamental_rel) : 0.0;
    return h;
}

CurrentSpectrum current_spectrum(const WaveformFrame& frame) {
    frame.validate();
    if (all_zero(frame.voltage)) throw Error(ErrorKind::Data, "no reference voltage");
    CurrentSpectrum s;
    for (int c = 0; c < frame.n_cycles; ++c) {
        const auto cur = frame.current_cycle(c);
        const cplx ref = std::conj(voltage_reference(frame, c));
        for (std::size_t k = 0; k < kHarmonicOrders.size(); ++k) {
            // Harmonic k rotates k times as fast as the fundamental.
            s.phasors[k] += cycle_phasor(cur, kHarmonicOrders[k]) * std::pow(ref, kHarmonicOrders[k]);
        }
    }
    s *= 1.0 / frame.n_cycles;
    return s;
}

PowerPair compute_pq(const WaveformFrame& frame) {
    frame.validate();
    if (all_zero(frame.voltage)) throw Error(ErrorKind::Data, "no reference voltage");
    cplx s{0.0, 0.0};
    for (int c = 0; c < frame.n_cycles; ++c) {
        const cplx v1 = cycle_phasor(frame.voltage_cycle(c), 1);
        const cplx i1 = cycle_phasor(frame.current_cycle(c), 1);
        s += v1 * std::conj(i1);
    }
    s /= static_cast<double>(frame.n_cycles);
    return {s.real(), s.imag()};
}

double compute_thd(const HarmonicVector& h) {
    const double i1 = h.magnitudes[0];
    if (!(i1 > 0.0)) throw Error(ErrorKind::Domain, "undefined THD");
    double sum = 0.0;
    for (std::size_t k = 1; k < h.magnitudes.size(); ++k) sum += h.magnitudes[k] * h.magnitudes[k];
    return std::sqrt(sum) / i1;
}

HarmonicVector to_harmonic_vector(const CurrentSpectrum& s) {
    HarmonicVector h;
    bool any = false;
    for (std::size_t k = 0; k < s.phasors.size(); ++k) {
        h.magnitudes[k] = std::abs(s.phasors[k]);
        any = any || h.magnitudes[k] > 0.0;
    }
    h.degenerate = !any;
    h.fundamental_phase = h.magnitudes[0] > 0.0 ? std::arg(s.phasors[0]) : 0.0;
    return h;
}

double compute_thd(const CurrentSpectrum& s) { return compute_thd(to_harmonic_vector(s)); }

WaveformFrame synthesize_frame(const FrameSynthesis& req) {
    WaveformFrame f;
    f.t = req.t;
    f.phase = req.phase;
    f.points_per_cycle = req.points_per_cycle;
    f.n_cycles = req.n_cycles;
    f.nominal_freq = req.nominal_freq;
    const auto n = static_cast<std::size_t>(req.points_per_cycle) * req.n_cycles;
    f.voltage.resize(n);
    f.current.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(i % req.points_per_cycle) /
                             req.points_per_cycle;
        f.voltage[i] = std::numbers::sqrt2 * req.voltage_rms * std::cos(theta);
        double cur = 0.0;
        for (std::size_t k = 0; k < kHarmonicOrders.size(); ++k) {
            const cplx ph = req.current.phasors[k];
            cur += std::numbers::sqrt2 * std::abs(ph) * std::cos(kHarmonicOrders[k] * theta + std::arg(ph));
        }
        f.current[i] = cur;
    }
    f.validate();
    return f;
}

}  // namespace loadsig
