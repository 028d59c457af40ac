#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loadsig/powercalc.hpp"
#include "loadsig/types.hpp"

namespace loadsig {

/// Local wall-clock time of recording second 0. Search windows are evaluated
/// against it; no DST or timezone arithmetic beyond this fixed offset.
struct Epoch {
    std::chrono::local_seconds time{};
    bool explicit_value = false;  // carried in the source file

    static Epoch parse(std::string_view iso);  // "YYYY-MM-DDTHH:MM:SS"
    std::string to_string() const;

    // Seconds since local midnight and weekday (0 = Sunday) of recording second t.
    int seconds_of_day(std::int64_t t) const;
    unsigned weekday(std::int64_t t) const;
    // Recording second of the local midnight starting the day that contains t.
    std::int64_t day_start(std::int64_t t) const;

    bool operator==(const Epoch&) const = default;
};

// Monday 2024-01-01 00:00:00, used when a file carries no epoch.
Epoch default_epoch();

struct PowerSample {
    std::int64_t t = 0;
    Phase phase = Phase::A;
    double p = 0.0;              // watts
    double q = 0.0;              // vars
    std::optional<double> thd;   // fraction; absent when unknown or no load

    bool operator==(const PowerSample&) const = default;
};

/// Detected power-change event. `delta_p` is signed (> 0 for ON).
struct LoadEvent {
    std::int64_t t = 0;
    PhaseTag phase = PhaseTag::A;
    Direction direction = Direction::On;
    double delta_p = 0.0;
    double delta_q = 0.0;
    std::optional<double> thd;  // fraction, of the switched load
    bool spike = false;
    bool corrupted = false;

    bool operator==(const LoadEvent&) const = default;
};

/// Dense per-second columns for one leg over the recording span.
struct PhaseColumns {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> thd;            // NaN when unknown
    std::vector<std::uint8_t> present;  // 1 when a sample exists
    std::vector<CurrentSpectrum> spectrum;  // empty unless loaded from frames

    bool has_spectrum() const { return !spectrum.empty(); }
};

/// Immutable-after-build whole-house recording at 1 Hz.
class MeterRecording {
public:
    MeterRecording() = default;
    MeterRecording(Epoch epoch, std::int64_t start, std::int64_t duration);

    // Builder interface used by the loaders and the generator.
    void set_sample(const PowerSample& s);
    void set_spectrum(Phase phase, std::int64_t t, const CurrentSpectrum& s);
    void clear_sample(Phase phase, std::int64_t t);
    // Recomputes the gap list; call after the last mutation.
    void finalize();

    const Epoch& epoch() const { return epoch_; }
    std::int64_t start() const { return start_; }
    std::int64_t end() const { return start_ + duration_; }
    std::int64_t duration() const { return duration_; }
    bool has_phase(Phase p) const { return active_[static_cast<int>(p)]; }
    const PhaseColumns& columns(Phase p) const { return cols_[static_cast<int>(p)]; }
    bool present(Phase p, std::int64_t t) const;

    std::vector<PowerSample> samples(Phase p) const;
    std::size_t sample_count() const;
    // Maximal intervals of the span where an active leg lacks a sample.
    const std::vector<Interval>& gaps() const { return gaps_; }

    // Same data with every timestamp moved by dt seconds (epoch unchanged).
    MeterRecording shifted(std::int64_t dt) const;
    // Same data read against another wall-clock origin.
    MeterRecording with_epoch(const Epoch& epoch) const;

    bool operator==(const MeterRecording&) const;

private:
    std::size_t index(std::int64_t t) const;

    Epoch epoch_ = default_epoch();
    std::int64_t start_ = 0;
    std::int64_t duration_ = 0;
    std::array<bool, 2> active_{false, false};
    std::array<PhaseColumns, 2> cols_;
    std::vector<Interval> gaps_;
};

// Samples CSV: `t_s,phase,P_W,Q_var,THD_pct`, optionally preceded by a
// `# epoch=YYYY-MM-DDTHH:MM:SS` line.
MeterRecording load_samples_csv(const std::filesystem::path& path);
MeterRecording parse_samples_csv(std::string_view text);
std::string format_samples_csv(const MeterRecording& rec);
void save_samples_csv(const MeterRecording& rec, const std::filesystem::path& path);

// Versioned binary waveform container; layout in docs/formats.md.
inline constexpr std::uint16_t kWaveformFormatVersion = 1;

struct WaveformFile {
    Epoch epoch;
    std::vector<WaveformFrame> frames;
};

void save_waveform_frames(const WaveformFile& file, const std::filesystem::path& path);
WaveformFile read_waveform_file(const std::filesystem::path& path);
// One PowerSample per frame, P/Q from fundamentals, THD from odd harmonics;
// the per-second current spectrum is retained for differential event THD.
MeterRecording recording_from_frames(const WaveformFile& file);
MeterRecording load_waveform_frames(const std::filesystem::path& path);

// Reads either input format, dispatching on the file's magic bytes.
MeterRecording load_recording(const std::filesystem::path& path);

// Events dump: `t_s,phase_tag,direction,dP_W,dQ_var,THD_pct,spike,corrupted`.
std::string format_events_csv(const std::vector<LoadEvent>& events);

}  // namespace loadsig
