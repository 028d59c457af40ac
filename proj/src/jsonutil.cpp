#include "jsonutil.hpp"

#include <cmath>
#include <cstdio>

#include "loadsig/error.hpp"

namespace loadsig::jsonutil {

void fail(const std::string& path, const std::string& message) {
    throw Error(ErrorKind::Config, path + ": " + message);
}

json parse(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, std::string(what) + ": invalid JSON: " + e.what());
    }
}

bool has(const json& obj, std::string_view key) { return obj.is_object() && obj.contains(key); }

const json& require(const json& obj, std::string_view key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + std::string(key), "missing field");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

double non_negative(const json& j, const std::string& path) {
    const double v = number(j, path);
    if (v < 0.0) fail(path, "must be non-negative");
    return v;
}

std::int64_t integer(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v == std::floor(v) && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    }
    fail(path, "expected an integer");
}

std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

Range range(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [min, max]");
    Range r{number(j[0], path + "[0]"), number(j[1], path + "[1]")};
    if (r.lo < 0.0 || r.hi < 0.0) fail(path, "bounds must be non-negative");
    if (r.lo > r.hi) fail(path, "min exceeds max");
    return r;
}

int clock_seconds(const json& j, const std::string& path) {
    const auto s = string(j, path);
    int h = -1, m = -1, sec = 0;
    char tail = 0;
    const int got = std::sscanf(s.c_str(), "%d:%d:%d%c", &h, &m, &sec, &tail);
    if ((got != 2 && got != 3) || h < 0 || m < 0 || m > 59 || sec < 0 || sec > 59) {
        fail(path, "expected HH:MM, got '" + s + "'");
    }
    const int total = h * 3600 + m * 60 + sec;
    if (total > 86400) fail(path, "time of day beyond 24:00");
    return total;
}

std::string format_clock(int seconds) {
    char buf[16];
    if (seconds % 60 != 0) {
        std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", seconds / 3600, (seconds / 60) % 60, seconds % 60);
    } else {
        std::snprintf(buf, sizeof buf, "%02d:%02d", seconds / 3600, (seconds / 60) % 60);
    }
    return buf;
}

}  // namespace loadsig::jsonutil
