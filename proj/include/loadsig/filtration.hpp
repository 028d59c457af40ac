#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "loadsig/meterdata.hpp"

namespace loadsig {

enum class SpikeRequirement { Yes, No, Either };
enum class PhaseCondition { Single, Double };
enum class Category { LinearActive, LinearReactive, NonlinearActive, NonlinearReactive };
enum class DaySet { All, Weekday, Weekend };

std::string_view to_string(SpikeRequirement s);
std::string_view to_string(PhaseCondition p);
std::string_view to_string(Category c);
std::string_view to_string(DaySet d);

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool operator==(const Range&) const = default;
};

struct Weights {
    double p = 0.0;
    double q = 0.0;
    double h = 0.0;

    bool operator==(const Weights&) const = default;
};

Weights default_weights(Category c);

// Daily local-time window [start_s, end_s) in seconds after midnight.
struct SearchWindow {
    int start_s = 0;
    int end_s = 86400;
    DaySet days = DaySet::All;

    bool applies_on(unsigned weekday) const;  // 0 = Sunday
    bool operator==(const SearchWindow&) const = default;
};

struct ConditionRow {
    std::string name;   // identifier, e.g. "stove_big"
    std::string label;  // display name
    Range p_w;
    Range q_var;        // compared against |dQ|
    Range thd_pct;      // percent, as in the table file
    SpikeRequirement spike = SpikeRequirement::Either;
    PhaseCondition phase = PhaseCondition::Single;
    std::vector<SearchWindow> windows;
    double avg_duration_min = 0.0;
    Category category = Category::LinearActive;
    Weights weights;

    // Throws Error(Config) naming the row and field.
    void validate() const;
    bool operator==(const ConditionRow&) const = default;
};

// The shipped table (data/conditions_default.json, compiled in).
std::vector<ConditionRow> default_condition_table();
std::vector<ConditionRow> parse_condition_table(std::string_view json_text);
std::vector<ConditionRow> load_condition_table(const std::filesystem::path& path);
std::string format_condition_table(const std::vector<ConditionRow>& rows);
const ConditionRow& find_row(const std::vector<ConditionRow>& rows, std::string_view name);

/// Spliced event-search domain: chronologically ordered, disjoint pieces.
struct SearchDomain {
    std::vector<Interval> pieces;

    std::int64_t total_seconds() const;
    // True when [lo, hi) lies inside a single piece.
    bool covers(std::int64_t lo, std::int64_t hi) const;
    bool operator==(const SearchDomain&) const = default;
};

// Per-day window intervals across the recording, adjacent ones joined, gaps
// removed. Throws Error(Insufficient, "empty search domain").
SearchDomain splice_data_pieces(const MeterRecording& rec, const ConditionRow& row);

// Seconds of clean signal required on each side of an event for it to count
// as inside a piece.
struct BoundaryGuard {
    int before_s = 3;
    int after_s = 3;
};

// The five per-event conditions, without the search-domain check.
bool matches_conditions(const LoadEvent& e, const ConditionRow& row);

struct SuspectSet {
    std::string appliance;
    std::vector<LoadEvent> events;
    std::vector<Interval> source_pieces;
};

SuspectSet filter_suspects(const std::vector<LoadEvent>& events, const ConditionRow& row, const SearchDomain& domain,
                           BoundaryGuard guard = {});

}  // namespace loadsig
