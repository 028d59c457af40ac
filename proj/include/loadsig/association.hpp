#pragma once

#include <string>
#include <vector>

#include "loadsig/clustering.hpp"
#include "loadsig/filtration.hpp"

namespace loadsig {

struct AssociationParams {
    double b = 0.3;
    double c = 0.8;
    double segment_factor = 1.5;
    // Segment events with |dP| above this multiple of the authentic mean are
    // dropped before clustering. There is no low-side cut.
    double prefilter_power_band = 3.0;

    void validate() const;  // throws Error(Config)
};

enum class AssociationType { Single, Repetitive, Occasional, Unrelated };
std::string_view to_string(AssociationType t);
AssociationType parse_association_type(std::string_view s);

struct DataSegment {
    LoadEvent anchor;
    Interval span;
    std::vector<LoadEvent> events;  // time ordered, anchor included
};

// Segment length in seconds: segment_factor x avg_duration_min x 60.
double segment_length_s(const ConditionRow& row, const AssociationParams& params);

// One segment per ON member of `authentic`, in time order. A segment holds the
// events carrying the anchor's phase tag inside [t, t + length).
std::vector<DataSegment> build_segments(const EventCluster& authentic, const std::vector<LoadEvent>& all_events,
                                        const ConditionRow& row, const AssociationParams& params);

AssociationType classify_association(std::size_t n_total, std::size_t n_max, std::size_t m,
                                     const AssociationParams& params);

struct AssociatedEventClass {
    EventCluster cluster;
    AssociationType type = AssociationType::Unrelated;
    Direction direction = Direction::On;
    std::size_t n_total = 0;                 // N
    std::size_t n_max = 0;                   // most occurrences in one segment
    std::vector<std::size_t> per_segment;    // occurrences by segment index
    std::vector<std::size_t> member_segment; // segment of each cluster member
    std::size_t anchors = 0;                 // segment anchors inside this class
    double median_offset_s = 0.0;            // of first occurrence, per segment
};

// Pools the events of all segments (shared events count once per segment),
// clusters ON and OFF events separately and types each class.
std::vector<AssociatedEventClass> associate_segments(const std::vector<DataSegment>& segments, const Weights& weights,
                                                     const ClusterParams& cluster_params,
                                                     const AssociationParams& params);

struct PatternStep {
    std::size_t class_index = 0;  // into CycleSignature::classes
    Direction direction = Direction::On;
    AssociationType type = AssociationType::Single;
    double mean_p = 0.0;
    double mean_q = 0.0;
    double mean_thd = 0.0;  // fraction
    double median_offset_s = 0.0;
    std::size_t n_total = 0;
    std::size_t n_max = 0;

    bool operator==(const PatternStep&) const = default;
};

struct CycleSignature {
    std::string appliance;
    std::vector<PatternStep> steps;  // anchor first, then by median offset
    std::size_t segments_used = 0;   // M
    bool open_cycle = false;         // no single or repetitive OFF class
    bool multiple_off = false;       // more than one single OFF class
    std::vector<std::string> warnings;

    // "1 -> 2* -> 3 -> (4 -> 5) -> 6": repetitive steps starred, runs of
    // occasional steps bracketed.
    std::string pattern() const;
    bool operator==(const CycleSignature&) const = default;
};

// Orders the non-unrelated classes behind the class holding the most anchors.
// Throws Error(Insufficient) when no class holds an anchor.
CycleSignature assemble_cycle(const std::string& appliance, const std::vector<AssociatedEventClass>& classes,
                              std::size_t segments_used);

}  // namespace loadsig
