#include "loadsig/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "loadsig/error.hpp"

namespace loadsig {

std::string_view to_string(Phase p) { return p == Phase::A ? "A" : "B"; }

std::string_view to_string(PhaseTag p) {
    switch (p) {
        case PhaseTag::A: return "A";
        case PhaseTag::B: return "B";
        case PhaseTag::AB: return "AB";
    }
    return "?";
}

std::string_view to_string(Direction d) { return d == Direction::On ? "ON" : "OFF"; }

Phase parse_phase(std::string_view s) {
    if (s == "A") return Phase::A;
    if (s == "B") return Phase::B;
    throw Error(ErrorKind::Data, "unknown phase '" + std::string(s) + "'");
}

PhaseTag parse_phase_tag(std::string_view s) {
    if (s == "A") return PhaseTag::A;
    if (s == "B") return PhaseTag::B;
    if (s == "AB") return PhaseTag::AB;
    throw Error(ErrorKind::Data, "unknown phase tag '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
    if (s == "ON") return Direction::On;
    if (s == "OFF") return Direction::Off;
    throw Error(ErrorKind::Data, "unknown direction '" + std::string(s) + "'");
}

std::string format_exact(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_short(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_double(std::string_view s, std::string_view what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::Data, "invalid number for " + std::string(what) + ": '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace loadsig
