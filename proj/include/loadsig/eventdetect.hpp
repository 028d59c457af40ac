#pragma once

#include <vector>

#include "loadsig/meterdata.hpp"

namespace loadsig {

enum class ThdMode {
    Differential,  // harmonic content of the switched load (default)
    Aggregate,     // post-edge whole-leg THD
};

struct EdgeDetectParams {
    double min_edge_w = 50.0;
    int settle_window_s = 3;
    int pre_window_s = 3;
    double spike_ratio = 1.5;
    int phase_pair_tolerance_s = 1;
    // Per-second change that opens or extends an edge region, as a fraction
    // of min_edge_w.
    double trigger_fraction = 0.5;
    ThdMode thd_mode = ThdMode::Differential;
    // Same-leg edges closer than this are flagged corrupted; 0 uses the
    // settle window.
    int collision_window_s = 0;

    void validate() const;  // throws Error(Config)
};

// Edges on one leg. Events carry the leg's single-phase tag.
std::vector<LoadEvent> detect_phase_events(const MeterRecording& rec, Phase phase,
                                           const EdgeDetectParams& params);

// Both legs, paired into AB events where simultaneous, then collision-marked.
// Throws Error(Data, "recording too short") when the span cannot hold one
// pre window plus one settle window.
std::vector<LoadEvent> detect_events(const MeterRecording& rec, const EdgeDetectParams& params);

// Merges same-direction A/B edges within the pairing tolerance into AB events
// (dP, dQ summed). Unpaired events keep their tag. Output sorted by time.
std::vector<LoadEvent> pair_double_phase(const std::vector<LoadEvent>& events_a,
                                         const std::vector<LoadEvent>& events_b,
                                         const EdgeDetectParams& params);

// Flags events with another event on a shared leg less than
// `collision_window_s` seconds away.
std::vector<LoadEvent> mark_corrupted(std::vector<LoadEvent> events, int collision_window_s);

}  // namespace loadsig
