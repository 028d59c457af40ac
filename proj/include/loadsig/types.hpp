#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace loadsig {

// A hot leg of a North American split-phase service.
enum class Phase : std::uint8_t { A = 0, B = 1 };

// Where an event was observed: one leg, or both legs at once (240 V loads).
enum class PhaseTag : std::uint8_t { A, B, AB };

enum class Direction : std::uint8_t { On, Off };

inline constexpr PhaseTag tag_of(Phase p) { return p == Phase::A ? PhaseTag::A : PhaseTag::B; }

// True when two tags share at least one leg.
inline constexpr bool shares_leg(PhaseTag x, PhaseTag y) {
    return x == y || x == PhaseTag::AB || y == PhaseTag::AB;
}

// Half-open interval [start, end) of recording seconds.
struct Interval {
    std::int64_t start = 0;
    std::int64_t end = 0;

    std::int64_t length() const { return end > start ? end - start : 0; }
    bool contains(std::int64_t t) const { return t >= start && t < end; }
    bool operator==(const Interval&) const = default;
};

std::string_view to_string(Phase p);
std::string_view to_string(PhaseTag p);
std::string_view to_string(Direction d);

Phase parse_phase(std::string_view s);
PhaseTag parse_phase_tag(std::string_view s);
Direction parse_direction(std::string_view s);

// Shortest decimal form that reads back to the identical double.
std::string format_exact(double v);
// Up to 12 significant digits; used where a unit conversion (fraction to
// percent) would otherwise leak representation noise into files.
std::string format_short(double v);
// Strict full-string parse; throws Error(Data) naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);

}  // namespace loadsig
