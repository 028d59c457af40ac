#pragma once

#include <string>
#include <vector>

#include "loadsig/pipeline.hpp"
#include "loadsig/synthhome.hpp"

namespace loadsig {

// Twelve one-hour runs of a space heater on leg A sharing a power strip with
// a microwave and a lamp. Run kinds: heating only (x5), heating with sway
// (x4), heating with the microwave (x1), heating with lamp and microwave
// (x2), shuffled by the seed. Truth states are the event ids "E1".."E11".
struct HeaterLab {
    SynthResult data;
    std::vector<int> run_kind;         // 1..4 per run
    std::vector<int> element_repeats;  // high-element cycles per run (1 or 2)
};

HeaterLab heater_lab_scenarios(std::uint64_t seed);

// Condition row used to find the heater in the bench data.
ConditionRow heater_condition_row();

struct HeaterBenchRow {
    std::string event;  // "E1".."E11"
    std::size_t expected_n = 0;
    AssociationType expected_type = AssociationType::Unrelated;
    bool present = false;  // exactly one class carries this label
    std::size_t n = 0;
    std::size_t n_max = 0;
    AssociationType type = AssociationType::Unrelated;
    bool match = false;
};

struct HeaterBenchReport {
    std::size_t m = 0;
    std::vector<HeaterBenchRow> rows;
    std::string pattern;
    bool all_match = false;
};

HeaterBenchReport run_heater_bench(std::uint64_t seed, const PipelineParams& params = {});

// Event association table: one line per event with N, the criterion that
// applied and the type, plus the expected values on mismatch.
std::string format_heater_report(const HeaterBenchReport& report, const AssociationParams& params = {});

}  // namespace loadsig
