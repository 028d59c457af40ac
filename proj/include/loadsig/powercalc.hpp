#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "loadsig/types.hpp"

namespace loadsig {

// Odd harmonic orders carried through the pipeline. Orders above 9 are
// discarded.
inline constexpr std::array<int, 5> kHarmonicOrders{1, 3, 5, 7, 9};

// Index of `order` in kHarmonicOrders; throws Error(Domain) for other orders.
std::size_t harmonic_index(int order);

/// One second of raw waveform for one leg: `n_cycles` consecutive cycles of
/// `points_per_cycle` samples each, stored cycle-major.
struct WaveformFrame {
    std::int64_t t = 0;
    Phase phase = Phase::A;
    int points_per_cycle = 0;
    int n_cycles = 0;
    double nominal_freq = 60.0;
    std::vector<double> voltage;  // volts
    std::vector<double> current;  // amperes

    // Throws Error(Data) when the shape invariants do not hold.
    void validate() const;

    std::span<const double> voltage_cycle(int c) const;
    std::span<const double> current_cycle(int c) const;
};

/// RMS current magnitudes at the odd orders 1..9.
struct HarmonicVector {
    std::array<double, kHarmonicOrders.size()> magnitudes{};
    double fundamental_phase = 0.0;  // radians, current relative to voltage
    bool degenerate = false;         // all-zero current

    double magnitude(int order) const { return magnitudes[harmonic_index(order)]; }
    void set(int order, double rms) { magnitudes[harmonic_index(order)] = rms; }
};

/// Complex RMS current phasors at the odd orders, angles referenced to the
/// voltage fundamental. Differences of spectra give the harmonic content of
/// a switched load.
struct CurrentSpectrum {
    std::array<std::complex<double>, kHarmonicOrders.size()> phasors{};

    CurrentSpectrum& operator+=(const CurrentSpectrum& o);
    CurrentSpectrum& operator-=(const CurrentSpectrum& o);
    CurrentSpectrum& operator*=(double k);
};

struct PowerPair {
    double p = 0.0;  // watts
    double q = 0.0;  // vars, positive for lagging current
};

HarmonicVector extract_harmonics(const WaveformFrame& frame);

// Cycle-averaged complex spectrum. Throws Error(Data) on an all-zero voltage.
CurrentSpectrum current_spectrum(const WaveformFrame& frame);

// Fundamental-only active and reactive power. Harmonic content does not
// contribute. Throws Error(Data, "no reference voltage") on zero voltage.
PowerPair compute_pq(const WaveformFrame& frame);

// sqrt(i3^2 + i5^2 + i7^2 + i9^2) / i1 as a fraction.
// Throws Error(Domain, "undefined THD") when i1 == 0.
double compute_thd(const HarmonicVector& h);
double compute_thd(const CurrentSpectrum& s);

HarmonicVector to_harmonic_vector(const CurrentSpectrum& s);

/// Inputs for building a band-limited frame: a voltage fundamental and a
/// current spectrum (RMS phasors relative to the voltage).
struct FrameSynthesis {
    std::int64_t t = 0;
    Phase phase = Phase::A;
    double voltage_rms = 120.0;
    CurrentSpectrum current;
    int points_per_cycle = 256;
    int n_cycles = 6;
    double nominal_freq = 60.0;
};

WaveformFrame synthesize_frame(const FrameSynthesis& req);

}  // namespace loadsig
