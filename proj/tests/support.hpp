#pragma once

// Shared fixtures and property checks for the unit tests and the acceptance
// runner. Property checks return an empty string on success, else the first
// counterexample.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "loadsig/association.hpp"
#include "loadsig/clustering.hpp"
#include "loadsig/eventdetect.hpp"
#include "loadsig/filtration.hpp"
#include "loadsig/meterdata.hpp"
#include "loadsig/rng.hpp"
#include "loadsig/synthhome.hpp"

namespace testsupport {

using namespace loadsig;

// ---------------------------------------------------------------------------
// Step recordings built directly from per-second sums, independent of the
// generator.

struct Step {
    Phase phase = Phase::A;
    std::int64_t t0 = 0;
    std::int64_t t1 = 0;
    double p = 0.0;
    double q = 0.0;
    double thd = 0.0;  // of this load
};

inline MeterRecording step_recording(const std::vector<Step>& steps, std::int64_t duration, double base_p = 50.0,
                                     double noise = 0.0, std::uint64_t seed = 1, bool both_legs = true) {
    std::vector<double> p[2], q[2], h[2];
    for (int k = 0; k < 2; ++k) {
        p[k].assign(duration, base_p);
        q[k].assign(duration, 10.0);
        h[k].assign(duration, 0.02 * std::hypot(base_p, 10.0));
    }
    for (const auto& s : steps) {
        const int k = static_cast<int>(s.phase);
        for (std::int64_t t = std::max<std::int64_t>(s.t0, 0); t < std::min(s.t1, duration); ++t) {
            p[k][t] += s.p;
            q[k][t] += s.q;
            h[k][t] += s.thd * std::hypot(s.p, s.q);
        }
    }
    Rng rng(seed, 77);
    MeterRecording rec(default_epoch(), 0, duration);
    for (int k = 0; k < (both_legs ? 2 : 1); ++k) {
        for (std::int64_t t = 0; t < duration; ++t) {
            PowerSample s;
            s.t = t;
            s.phase = static_cast<Phase>(k);
            s.p = p[k][t] + (noise > 0 ? rng.normal(0.0, noise) : 0.0);
            s.q = q[k][t] + (noise > 0 ? rng.normal(0.0, noise) : 0.0);
            const double mag = std::hypot(p[k][t], q[k][t]);
            if (mag > 0) s.thd = h[k][t] / mag;
            rec.set_sample(s);
        }
    }
    rec.finalize();
    return rec;
}

// Non-overlapping random loads on both legs inside [lo, hi), at least `gap`
// seconds between any two switching instants on a leg.
inline std::vector<Step> random_steps(Rng& rng, std::int64_t lo, std::int64_t hi, int count, std::int64_t gap = 20) {
    std::vector<Step> out;
    for (int k = 0; k < 2; ++k) {
        std::int64_t t = lo + gap;
        for (int i = 0; i < count; ++i) {
            const std::int64_t on = t + rng.uniform_int(0, gap);
            const std::int64_t off = on + gap + rng.uniform_int(0, 3 * gap);
            if (off + gap >= hi) break;
            Step s;
            s.phase = static_cast<Phase>(k);
            s.t0 = on;
            s.t1 = off;
            s.p = rng.uniform(200.0, 2000.0);
            s.q = rng.uniform(0.0, 400.0);
            s.thd = rng.uniform(0.0, 0.4);
            out.push_back(s);
            t = off + gap;
        }
    }
    return out;
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

inline bool same_event(const LoadEvent& a, const LoadEvent& b, double tol) {
    if (a.t != b.t || a.phase != b.phase || a.direction != b.direction || a.spike != b.spike ||
        a.corrupted != b.corrupted || a.thd.has_value() != b.thd.has_value())
        return false;
    if (!near(a.delta_p, b.delta_p, tol) || !near(a.delta_q, b.delta_q, tol)) return false;
    return !a.thd || near(*a.thd, *b.thd, tol);
}

// ---------------------------------------------------------------------------
// Suspect set with the composition of a fridge's filtered ON events: a
// fridge group, a fan group, a small motor group and one corrupted event.

struct ReplicaGroup {
    double p, q, thd;
    int n;
};

inline const std::vector<ReplicaGroup>& replica_groups() {
    static const std::vector<ReplicaGroup> g{
        {100.3, 76.2, 0.106, 75}, {87.7, 67.9, 0.103, 10}, {73.6, 58.8, 0.022, 2}, {189.6, 138.5, 0.099, 1}};
    return g;
}

struct Replica {
    std::vector<LoadEvent> events;  // time ordered
    std::vector<int> group;         // per event
};

// Gaussian spread of sigma_norm normalized units: sigma = sigma_norm * range / 99
// per feature, the range taken over the group means.
inline Replica make_replica(std::uint64_t seed, double sigma_norm = 2.0) {
    const auto& g = replica_groups();
    double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
    for (const auto& x : g) {
        const double f[3] = {x.p, x.q, x.thd};
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], f[i]);
            hi[i] = std::max(hi[i], f[i]);
        }
    }
    double sigma[3];
    for (int i = 0; i < 3; ++i) sigma[i] = sigma_norm * (hi[i] - lo[i]) / 99.0;

    Rng rng(seed, 0x7ab1e2);
    std::vector<std::pair<LoadEvent, int>> all;
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (int i = 0; i < g[k].n; ++i) {
            LoadEvent e;
            e.phase = PhaseTag::A;
            e.direction = Direction::On;
            e.spike = true;
            e.delta_p = rng.normal(g[k].p, sigma[0]);
            e.delta_q = rng.normal(g[k].q, sigma[1]);
            e.thd = std::max(0.0, rng.normal(g[k].thd, sigma[2]));
            all.push_back({e, static_cast<int>(k)});
        }
    }
    // Interleave groups in time.
    for (std::size_t i = all.size() - 1; i > 0; --i)
        std::swap(all[i], all[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
    Replica r;
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i].first.t = 1000 + static_cast<std::int64_t>(i) * 3600;
        r.events.push_back(all[i].first);
        r.group.push_back(all[i].second);
    }
    return r;
}

// Events of the dominant cluster that do not belong to the fridge group.
inline std::size_t foreign_in_dominant(const Replica& r, const std::vector<std::vector<std::size_t>>& groups) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < groups.size(); ++i)
        if (groups[i].size() > groups[best].size()) best = i;
    std::size_t foreign = 0;
    for (auto idx : groups[best]) foreign += r.group[idx] != 0 ? 1 : 0;
    return foreign;
}

inline ClusterParams mean_shift_params(double bandwidth) {
    ClusterParams p;
    p.method = ClusterMethod::MeanShift;
    p.bandwidth = bandwidth;
    return p;
}

// Random event set for clustering properties: a few loose groups.
inline std::vector<LoadEvent> random_events(Rng& rng, int n) {
    const int groups = static_cast<int>(rng.uniform_int(1, 5));
    std::vector<FeatureVector> centers;
    for (int g = 0; g < groups; ++g)
        centers.push_back({rng.uniform(50, 3000), rng.uniform(0, 500), rng.uniform(0, 0.6)});
    std::vector<LoadEvent> out;
    for (int i = 0; i < n; ++i) {
        const auto& c = centers[static_cast<std::size_t>(rng.uniform_int(0, groups - 1))];
        LoadEvent e;
        e.t = i * 60;
        e.direction = Direction::On;
        e.delta_p = c[0] * rng.uniform(0.9, 1.1);
        e.delta_q = c[1] * rng.uniform(0.8, 1.2);
        e.thd = c[2] * rng.uniform(0.8, 1.2);
        out.push_back(e);
    }
    return out;
}

inline std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---------------------------------------------------------------------------
// Property checks

// Widening any range of a row never removes a suspect.
inline std::string check_filtration_monotonicity(int trials, std::uint64_t seed) {
    Rng rng(seed, 11);
    const auto table = default_condition_table();
    for (int trial = 0; trial < trials; ++trial) {
        ConditionRow row = table[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(table.size()) - 1))];
        ConditionRow wide = row;
        auto widen = [&](Range& r, double span) {
            r.lo = std::max(0.0, r.lo - rng.uniform(0.0, span));
            r.hi += rng.uniform(0.0, span);
        };
        widen(wide.p_w, 500.0);
        widen(wide.q_var, 100.0);
        widen(wide.thd_pct, 10.0);
        if (rng.bernoulli(0.3)) wide.spike = SpikeRequirement::Either;

        std::vector<LoadEvent> events;
        const int n = static_cast<int>(rng.uniform_int(1, 40));
        for (int i = 0; i < n; ++i) {
            LoadEvent e;
            e.t = 100 + i * 30;
            e.direction = rng.bernoulli(0.7) ? Direction::On : Direction::Off;
            const double mag = rng.uniform(10.0, 6000.0);
            e.delta_p = e.direction == Direction::On ? mag : -mag;
            e.delta_q = rng.uniform(-300.0, 1300.0);
            if (rng.bernoulli(0.9)) e.thd = rng.uniform(0.0, 1.0);
            e.spike = rng.bernoulli(0.5);
            const int ph = static_cast<int>(rng.uniform_int(0, 2));
            e.phase = ph == 0 ? PhaseTag::A : ph == 1 ? PhaseTag::B : PhaseTag::AB;
            events.push_back(e);
        }
        SearchDomain domain{{Interval{0, 100 + n * 30 + 100}}};
        const auto narrow_set = filter_suspects(events, row, domain);
        const auto wide_set = filter_suspects(events, wide, domain);
        for (const auto& e : narrow_set.events) {
            if (std::find(wide_set.events.begin(), wide_set.events.end(), e) == wide_set.events.end())
                return "trial " + std::to_string(trial) + ": widening " + row.name + " dropped the event at t=" +
                       std::to_string(e.t);
        }
        if (wide_set.events.size() < narrow_set.events.size()) return "trial " + std::to_string(trial) + ": fewer suspects";
    }
    return {};
}

inline std::string check_partition(const std::vector<LoadEvent>& events, const std::vector<EventCluster>& clusters) {
    std::vector<LoadEvent> seen;
    for (const auto& c : clusters) {
        if (c.members.empty()) return "empty cluster";
        double p = 0, q = 0, h = 0;
        for (const auto& m : c.members) {
            const auto f = event_features(m);
            p += m.delta_p;
            q += m.delta_q;
            h += f[2];
            seen.push_back(m);
        }
        const double n = static_cast<double>(c.members.size());
        if (!near(c.mean_p, p / n, 1e-9) || !near(c.mean_q, q / n, 1e-9) || !near(c.mean_thd, h / n, 1e-9))
            return "cluster mean differs from its members' mean";
    }
    if (seen.size() != events.size()) return "member count " + std::to_string(seen.size()) + " vs " + std::to_string(events.size());
    auto key = [](const LoadEvent& a, const LoadEvent& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.delta_p < b.delta_p;
    };
    auto x = events;
    std::sort(x.begin(), x.end(), key);
    std::sort(seen.begin(), seen.end(), key);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] == seen[i])) return "event at t=" + std::to_string(x[i].t) + " missing or duplicated";
    return {};
}

// Partition and mean consistency for both methods, weight-based idempotence
// on the final means.
inline std::string check_clustering_invariants(int trials, std::uint64_t seed) {
    Rng rng(seed, 12);
    for (int trial = 0; trial < trials; ++trial) {
        const auto events = random_events(rng, static_cast<int>(rng.uniform_int(1, 60)));
        Weights w{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
        const double sum = w.p + w.q + w.h;
        w = {w.p / sum, w.q / sum, w.h / sum};
        ClusterParams wp;
        wp.similarity_threshold = rng.uniform(0.5, 0.95);
        const auto wb = weight_based_cluster(events, w, wp);
        if (auto m = check_partition(events, wb); !m.empty()) return "weight-based trial " + std::to_string(trial) + ": " + m;
        const auto ms = mean_shift_cluster(events, mean_shift_params(rng.uniform(5.0, 20.0)));
        if (auto m = check_partition(events, ms); !m.empty()) return "mean-shift trial " + std::to_string(trial) + ": " + m;

        std::vector<LoadEvent> means;
        for (std::size_t i = 0; i < wb.size(); ++i) {
            LoadEvent e;
            e.t = static_cast<std::int64_t>(i);
            e.direction = Direction::On;
            e.delta_p = wb[i].mean_p;
            e.delta_q = wb[i].mean_q;
            e.thd = wb[i].mean_thd;
            means.push_back(e);
        }
        const auto again = weight_based_cluster(means, w, wp);
        if (again.size() != means.size()) return "idempotence trial " + std::to_string(trial) + ": means merged";
        for (std::size_t i = 0; i < again.size(); ++i) {
            if (again[i].size() != 1 || !(again[i].members[0] == means[i]))
                return "idempotence trial " + std::to_string(trial) + ": means changed";
        }
    }
    return {};
}

// Every (N, n_max, M, b, c) gets exactly one type, the type follows the
// criteria, and raising b or c never moves a class towards "single".
inline std::string check_classification(int trials, std::uint64_t seed) {
    Rng rng(seed, 13);
    auto rank = [](AssociationType t) {
        switch (t) {
            case AssociationType::Single:
            case AssociationType::Repetitive: return 2;
            case AssociationType::Occasional: return 1;
            case AssociationType::Unrelated: return 0;
        }
        return -1;
    };
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t m = static_cast<std::size_t>(rng.uniform_int(1, 50));
        const std::size_t n_max = static_cast<std::size_t>(rng.uniform_int(1, 5));
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(n_max), 120));
        AssociationParams p;
        p.b = rng.uniform(0.01, 0.6);
        p.c = rng.uniform(p.b + 0.01, 1.0);
        const auto t = classify_association(n, n_max, m, p);
        const double nn = static_cast<double>(n), mm = static_cast<double>(m);
        AssociationType expect;
        if (nn >= p.c * mm) expect = n_max == 1 ? AssociationType::Single : AssociationType::Repetitive;
        else if (nn >= p.b * mm) expect = AssociationType::Occasional;
        else expect = AssociationType::Unrelated;
        if (t != expect) return "trial " + std::to_string(trial) + ": type disagrees with the criteria";

        AssociationParams up = p;
        up.b = std::min(p.b + rng.uniform(0.0, 0.3), p.c - 1e-6);
        up.c = std::min(1.0, p.c + rng.uniform(0.0, 0.3));
        if (rank(classify_association(n, n_max, m, up)) > rank(t))
            return "trial " + std::to_string(trial) + ": raising thresholds promoted a class";
    }
    return {};
}

// detect(shift(x, dt)) == shift(detect(x), dt).
inline std::string check_shift_equivariance(int trials, std::uint64_t seed) {
    Rng rng(seed, 14);
    EdgeDetectParams params;
    for (int trial = 0; trial < trials; ++trial) {
        const auto steps = random_steps(rng, 0, 1500, 12);
        const auto rec = step_recording(steps, 1500, 50.0, 2.0, seed + trial);
        const std::int64_t dt = rng.uniform_int(-100000, 100000);
        const auto base = detect_events(rec, params);
        const auto moved = detect_events(rec.shifted(dt), params);
        if (base.size() != moved.size()) return "trial " + std::to_string(trial) + ": event count changed";
        for (std::size_t i = 0; i < base.size(); ++i) {
            auto e = base[i];
            e.t += dt;
            if (!(e == moved[i])) return "trial " + std::to_string(trial) + ": event differs after shift";
        }
    }
    return {};
}

// Two noise-free recordings whose switching lies in disjoint halves: events
// of the sum are the union of each one's events.
inline std::string check_superposition_at_separation(int trials, std::uint64_t seed) {
    Rng rng(seed, 15);
    EdgeDetectParams params;
    const std::int64_t dur = 2400;
    for (int trial = 0; trial < trials; ++trial) {
        auto first = random_steps(rng, 0, 1100, 8);
        auto second = random_steps(rng, 1300, dur, 8);
        auto both = first;
        both.insert(both.end(), second.begin(), second.end());
        const auto e1 = detect_events(step_recording(first, dur, 25.0), params);
        const auto e2 = detect_events(step_recording(second, dur, 25.0), params);
        const auto es = detect_events(step_recording(both, dur, 50.0), params);
        auto uni = e1;
        uni.insert(uni.end(), e2.begin(), e2.end());
        std::stable_sort(uni.begin(), uni.end(), [](const LoadEvent& a, const LoadEvent& b) { return a.t < b.t; });
        if (uni.size() != es.size())
            return "trial " + std::to_string(trial) + ": " + std::to_string(es.size()) + " events vs " +
                   std::to_string(uni.size());
        for (std::size_t i = 0; i < es.size(); ++i) {
            // Same-time events on A and B may come out in either order.
            const auto it = std::find_if(uni.begin(), uni.end(), [&](const LoadEvent& x) { return same_event(x, es[i], 1e-9); });
            if (it == uni.end()) return "trial " + std::to_string(trial) + ": event at t=" + std::to_string(es[i].t) + " differs";
        }
    }
    return {};
}

inline Scenario small_scenario() {
    auto sc = default_scenario();
    sc.days = 2;
    return sc;
}

// Same seed, same output; different seed, different output.
inline std::string check_synth_determinism(std::uint64_t seed) {
    const auto sc = small_scenario();
    const auto a = generate(sc, seed, sc.days);
    const auto b = generate(sc, seed, sc.days);
    if (!(a.recording == b.recording) || a.truth.events != b.truth.events) return "same seed gave different output";
    const auto c = generate(sc, seed + 1, sc.days);
    if (a.recording == c.recording) return "different seeds gave identical recordings";
    return {};
}

// Rendering all traces equals the sum of rendering each alone.
inline std::string check_synth_superposition(std::uint64_t seed) {
    const auto sc = small_scenario();
    const std::int64_t dur = static_cast<std::int64_t>(sc.days) * 86400;
    std::vector<ApplianceTrace> traces;
    for (std::size_t i = 0; i < sc.appliances.size(); ++i)
        traces.push_back(plan_appliance(sc.appliances[i], i, seed, sc.epoch, sc.days));
    auto zero = [&] {
        std::array<PhaseSeries, 2> s;
        for (auto& x : s) {
            x.p.assign(dur, 0.0);
            x.q.assign(dur, 0.0);
            x.h.assign(dur, 0.0);
        }
        return s;
    };
    auto all = zero();
    for (const auto& t : traces) render_trace(t, seed, all);
    auto sum = zero();
    for (const auto& t : traces) {
        auto one = zero();
        render_trace(t, seed, one);
        for (int k = 0; k < 2; ++k)
            for (std::int64_t i = 0; i < dur; ++i) {
                sum[k].p[i] += one[k].p[i];
                sum[k].q[i] += one[k].q[i];
                sum[k].h[i] += one[k].h[i];
            }
    }
    for (int k = 0; k < 2; ++k)
        for (std::int64_t i = 0; i < dur; ++i) {
            if (std::abs(all[k].p[i] - sum[k].p[i]) > 1e-9 || std::abs(all[k].q[i] - sum[k].q[i]) > 1e-9 ||
                std::abs(all[k].h[i] - sum[k].h[i]) > 1e-9)
                return "leg " + std::to_string(k) + " second " + std::to_string(i) + " differs";
        }
    return {};
}

}  // namespace testsupport
