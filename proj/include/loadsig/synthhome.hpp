#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loadsig/filtration.hpp"
#include "loadsig/meterdata.hpp"

namespace loadsig {

// ---------------------------------------------------------------------------
// Scenario description

struct ComponentSpec {
    std::string name;
    double p = 0.0;    // W
    double q = 0.0;    // var
    double thd = 0.0;  // fraction
};

struct StateSpec {
    std::string name;
    std::vector<std::string> components;  // empty for an idle pause
    Range duration_s;
    double inrush = 1.0;  // peak multiplier of the entering step
};

// States played in order, the whole block repeated a drawn number of times.
struct SequenceItem {
    std::vector<std::string> states;
    int repeat_min = 1;
    int repeat_max = 1;
};

// Ancillary load switched on within some cycles (a fridge's door light).
struct OccasionalSpec {
    ComponentSpec load;
    double probability = 0.0;  // per cycle
    Range offset_s;            // from cycle start
    Range duration_s;
};

enum class ScheduleKind { Periodic, Random };

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Random;
    std::vector<SearchWindow> windows;  // empty: whole day
    Range off_s;                        // periodic: pause between cycles
    int per_day_min = 0;                // random: cycles per matching day
    int per_day_max = 0;
};

struct ApplianceModel {
    std::string name;
    PhaseTag phase = PhaseTag::A;  // AB loads split evenly across the legs
    std::vector<ComponentSpec> components;
    std::vector<StateSpec> states;
    std::vector<SequenceItem> sequence;
    std::vector<OccasionalSpec> occasional;
    ScheduleSpec schedule;
    double noise_sigma = 0.0;  // W, while on
    double jitter = 0.01;      // per-cycle relative spread of power levels
    int inrush_decay_s = 2;
};

struct BaseLoad {
    double p = 0.0;
    double q = 0.0;
    double thd = 0.0;
};

struct Scenario {
    std::string name;
    Epoch epoch;
    int days = 7;
    double noise_sigma = 5.0;  // W and var, per leg
    std::array<BaseLoad, 2> base{};
    std::vector<ApplianceModel> appliances;

    void validate() const;  // throws Error(Config) with a field path
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);
// data/scenario_default.json, compiled in.
Scenario default_scenario();

// ---------------------------------------------------------------------------
// Ground truth

struct TruthEvent {
    std::int64_t t = 0;
    std::string appliance;
    PhaseTag phase = PhaseTag::A;
    Direction direction = Direction::On;
    double delta_p = 0.0;
    double delta_q = 0.0;
    std::optional<double> thd;  // fraction, of the switched load
    // Component change, e.g. "+compressor" or "-inducer-blower".
    std::string state;

    bool operator==(const TruthEvent&) const = default;
};

// Truth CSV: `t_s,appliance,direction,dP_W,dQ_var,THD_pct,state`.
std::string format_truth_csv(const std::vector<TruthEvent>& events);
std::vector<TruthEvent> parse_truth_csv(std::string_view text);
std::vector<TruthEvent> load_truth_csv(const std::filesystem::path& path);

// Constant load level over [t0, t1) in recording seconds.
struct LoadInterval {
    std::int64_t t0 = 0;
    std::int64_t t1 = 0;
    double p = 0.0;
    double q = 0.0;
    double h = 0.0;  // harmonic magnitude proxy, thd * |S|
};

struct InrushPulse {
    std::int64_t t = 0;
    double extra_p = 0.0;  // added at t, decaying linearly to 0
    int decay_s = 2;
};

/// One appliance's full activity over the run.
struct ApplianceTrace {
    std::string name;
    PhaseTag phase = PhaseTag::A;
    std::vector<LoadInterval> intervals;
    std::vector<InrushPulse> inrush;
    std::vector<TruthEvent> events;
    double noise_sigma = 0.0;
    std::uint64_t noise_stream = 0;
    std::vector<std::int64_t> cycle_starts;
};

struct PhaseSeries {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> h;
};

struct GroundTruth {
    std::vector<TruthEvent> events;  // all appliances, time ordered
    std::map<std::string, std::vector<std::int64_t>> cycle_starts;
    std::map<std::string, std::vector<int>> draws_per_day;  // random schedules
    std::array<PhaseSeries, 2> clean;  // pre-noise aggregate incl. base load
};

struct SynthResult {
    MeterRecording recording;
    GroundTruth truth;
};

// Activity of one model over [0, days * 86400). `index` picks the RNG stream.
ApplianceTrace plan_appliance(const ApplianceModel& model, std::size_t index, std::uint64_t seed, const Epoch& epoch,
                              int days, std::vector<int>* draws = nullptr);

// Adds one trace's per-second contribution to both legs' series.
void render_trace(const ApplianceTrace& trace, std::uint64_t seed, std::array<PhaseSeries, 2>& series);

// Sums traces in order over the base load, then adds meter noise.
SynthResult render_house(const std::vector<ApplianceTrace>& traces, const std::array<BaseLoad, 2>& base,
                         double noise_sigma, std::uint64_t seed, const Epoch& epoch, std::int64_t duration);

SynthResult generate(const Scenario& scenario, std::uint64_t seed, int days);

// Current spectrum of a load drawing (p, q) with harmonic magnitude h at
// voltage_rms. Harmonic content is spread over orders 3..9 in a fixed shape.
CurrentSpectrum load_spectrum(double p, double q, double h, double voltage_rms = 120.0);

// Waveform frames for seconds [t0, t1) of a generated run, reproducing the
// recording's per-second P, Q and THD.
WaveformFile synthesize_waveforms(const MeterRecording& rec, std::int64_t t0, std::int64_t t1,
                                  double voltage_rms = 120.0);

}  // namespace loadsig
