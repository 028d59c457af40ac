#include "loadsig/eventdetect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loadsig/error.hpp"

namespace loadsig {

namespace {

// A maximal run of triggered per-second changes. Samples [s, first_after)
// are transient; first_after is the first sample at the settled level.
struct Region {
    std::int64_t s = 0;
    std::int64_t first_after = 0;
};

struct WindowMeans {
    double p = 0.0;
    double q = 0.0;
    double h = 0.0;    // harmonic content proxy, thd * |S|
    double thd = 0.0;  // mean aggregate THD
    bool thd_known = true;
};

WindowMeans window_means(const PhaseColumns& c, std::int64_t lo, std::int64_t hi) {
    WindowMeans m;
    const double n = static_cast<double>(hi - lo);
    for (std::int64_t i = lo; i < hi; ++i) {
        const auto k = static_cast<std::size_t>(i);
        m.p += c.p[k];
        m.q += c.q[k];
        const double s = std::hypot(c.p[k], c.q[k]);
        if (std::isnan(c.thd[k])) {
            if (s > 1e-9) m.thd_known = false;
        } else {
            m.h += c.thd[k] * s;
            m.thd += c.thd[k];
        }
    }
    m.p /= n;
    m.q /= n;
    m.h /= n;
    m.thd /= n;
    return m;
}

CurrentSpectrum mean_spectrum(const PhaseColumns& c, std::int64_t lo, std::int64_t hi) {
    CurrentSpectrum acc;
    for (std::int64_t i = lo; i < hi; ++i) acc += c.spectrum[static_cast<std::size_t>(i)];
    acc *= 1.0 / static_cast<double>(hi - lo);
    return acc;
}

std::vector<Region> find_regions(const PhaseColumns& c, std::int64_t r0, std::int64_t r1, double trigger) {
    std::vector<Region> out;
    std::int64_t i = r0 + 1;
    while (i < r1) {
        const auto k = static_cast<std::size_t>(i);
        if (std::abs(c.p[k] - c.p[k - 1]) < trigger) {
            ++i;
            continue;
        }
        Region r{i, i};
        while (i < r1 && std::abs(c.p[static_cast<std::size_t>(i)] - c.p[static_cast<std::size_t>(i) - 1]) >= trigger) {
            r.first_after = i;
            ++i;
        }
        out.push_back(r);
    }
    return out;
}

bool sorted_by_time(const LoadEvent& x, const LoadEvent& y) {
    if (x.t != y.t) return x.t < y.t;
    return static_cast<int>(x.phase) < static_cast<int>(y.phase);
}

}  // namespace

void EdgeDetectParams::validate() const {
    if (!(min_edge_w > 0.0)) throw Error(ErrorKind::Config, "min_edge_W must be positive");
    if (settle_window_s < 1) throw Error(ErrorKind::Config, "settle_window_s must be at least 1");
    if (pre_window_s < 1) throw Error(ErrorKind::Config, "pre_window_s must be at least 1");
    if (!(spike_ratio > 1.0)) throw Error(ErrorKind::Config, "spike_ratio must exceed 1");
    if (phase_pair_tolerance_s < 0) throw Error(ErrorKind::Config, "phase_pair_tolerance_s must be non-negative");
    if (!(trigger_fraction > 0.0 && trigger_fraction <= 1.0)) {
        throw Error(ErrorKind::Config, "trigger_fraction must be in (0, 1]");
    }
    if (collision_window_s < 0) throw Error(ErrorKind::Config, "collision_window_s must be non-negative");
}

std::vector<LoadEvent> detect_phase_events(const MeterRecording& rec, Phase phase, const EdgeDetectParams& params) {
    params.validate();
    std::vector<LoadEvent> events;
    if (!rec.has_phase(phase)) return events;
    const auto& c = rec.columns(phase);
    const std::int64_t n = rec.duration();
    const double trigger = params.trigger_fraction * params.min_edge_w;

    std::int64_t r0 = 0;
    while (r0 < n) {
        if (!c.present[static_cast<std::size_t>(r0)]) {
            ++r0;
            continue;
        }
        std::int64_t r1 = r0;
        while (r1 < n && c.present[static_cast<std::size_t>(r1)]) ++r1;

        const auto regions = find_regions(c, r0, r1, trigger);
        for (std::size_t j = 0; j < regions.size(); ++j) {
            const auto& r = regions[j];
            if (r.s - params.pre_window_s < r0 || r.first_after + params.settle_window_s > r1) continue;
            const std::int64_t before_lo = std::max(r.s - params.pre_window_s, j > 0 ? regions[j - 1].first_after : r0);
            const std::int64_t after_hi =
                std::min(r.first_after + params.settle_window_s, j + 1 < regions.size() ? regions[j + 1].s : r1);
            if (before_lo >= r.s || after_hi <= r.first_after) continue;

            const auto before = window_means(c, before_lo, r.s);
            const auto after = window_means(c, r.first_after, after_hi);
            const double dp = after.p - before.p;
            if (std::abs(dp) < params.min_edge_w) continue;

            LoadEvent e;
            e.t = rec.start() + r.s;
            e.phase = tag_of(phase);
            e.direction = dp > 0.0 ? Direction::On : Direction::Off;
            e.delta_p = dp;
            e.delta_q = after.q - before.q;

            if (params.thd_mode == ThdMode::Aggregate) {
                if (after.thd_known) e.thd = after.thd;
            } else if (c.has_spectrum()) {
                auto diff = mean_spectrum(c, r.first_after, after_hi);
                diff -= mean_spectrum(c, before_lo, r.s);
                if (std::abs(diff.phasors[0]) > 1e-12) e.thd = compute_thd(diff);
            } else if (before.thd_known && after.thd_known) {
                const double s_load = std::hypot(dp, e.delta_q);
                e.thd = std::abs(after.h - before.h) / s_load;
            }

            if (e.direction == Direction::On) {
                double peak = -std::numeric_limits<double>::infinity();
                for (std::int64_t i = r.s; i < after_hi; ++i) peak = std::max(peak, c.p[static_cast<std::size_t>(i)]);
                e.spike = peak - before.p >= params.spike_ratio * dp;
            }

            int strong = 0;
            for (std::int64_t i = r.s; i <= r.first_after; ++i) {
                const double d = c.p[static_cast<std::size_t>(i)] - c.p[static_cast<std::size_t>(i) - 1];
                if (std::abs(d) >= params.min_edge_w && (d > 0.0) == (dp > 0.0)) ++strong;
            }
            e.corrupted = strong >= 2;
            events.push_back(e);
        }
        r0 = r1;
    }
    return events;
}

std::vector<LoadEvent> pair_double_phase(const std::vector<LoadEvent>& events_a, const std::vector<LoadEvent>& events_b,
                                         const EdgeDetectParams& params) {
    std::vector<LoadEvent> out;
    std::vector<bool> used_b(events_b.size(), false);
    std::size_t lo = 0;
    for (const auto& a : events_a) {
        while (lo < events_b.size() && events_b[lo].t < a.t - params.phase_pair_tolerance_s) ++lo;
        std::size_t best = events_b.size();
        for (std::size_t j = lo; j < events_b.size() && events_b[j].t <= a.t + params.phase_pair_tolerance_s; ++j) {
            const auto& b = events_b[j];
            if (used_b[j] || b.direction != a.direction) continue;
            if (best == events_b.size()) {
                best = j;
                continue;
            }
            const auto& cur = events_b[best];
            const auto dt = std::abs(b.t - a.t);
            const auto dt_cur = std::abs(cur.t - a.t);
            if (dt < dt_cur || (dt == dt_cur && std::abs(b.delta_p - a.delta_p) < std::abs(cur.delta_p - a.delta_p))) {
                best = j;
            }
        }
        if (best == events_b.size()) {
            out.push_back(a);
            continue;
        }
        used_b[best] = true;
        const auto& b = events_b[best];
        LoadEvent m;
        m.t = std::min(a.t, b.t);
        m.phase = PhaseTag::AB;
        m.direction = a.direction;
        m.delta_p = a.delta_p + b.delta_p;
        m.delta_q = a.delta_q + b.delta_q;
        if (a.thd && b.thd) {
            const double sa = std::hypot(a.delta_p, a.delta_q);
            const double sb = std::hypot(b.delta_p, b.delta_q);
            m.thd = (*a.thd * sa + *b.thd * sb) / (sa + sb);
        }
        m.spike = a.spike || b.spike;
        m.corrupted = a.corrupted || b.corrupted;
        out.push_back(m);
    }
    for (std::size_t j = 0; j < events_b.size(); ++j) {
        if (!used_b[j]) out.push_back(events_b[j]);
    }
    std::stable_sort(out.begin(), out.end(), sorted_by_time);
    return out;
}

std::vector<LoadEvent> mark_corrupted(std::vector<LoadEvent> events, int collision_window_s) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        for (std::size_t j = i + 1; j < events.size() && events[j].t - events[i].t < collision_window_s; ++j) {
            if (shares_leg(events[i].phase, events[j].phase)) {
                events[i].corrupted = true;
                events[j].corrupted = true;
            }
        }
    }
    return events;
}

std::vector<LoadEvent> detect_events(const MeterRecording& rec, const EdgeDetectParams& params) {
    params.validate();
    if (rec.duration() < params.pre_window_s + params.settle_window_s) {
        throw Error(ErrorKind::Data, "recording too short");
    }
    const auto a = detect_phase_events(rec, Phase::A, params);
    const auto b = detect_phase_events(rec, Phase::B, params);
    const int window = params.collision_window_s > 0 ? params.collision_window_s : params.settle_window_s;
    return mark_corrupted(pair_double_phase(a, b, params), window);
}

}  // namespace loadsig
