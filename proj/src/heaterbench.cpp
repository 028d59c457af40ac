#include "loadsig/heaterbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "loadsig/error.hpp"
#include "loadsig/rng.hpp"

namespace loadsig {

namespace {

constexpr std::int64_t kRunSpacing = 3600;
constexpr std::int64_t kFirstRun = 600;
constexpr int kRuns = 12;
constexpr std::uint64_t kBenchStream = 0x4ea7e7;

struct Load {
    double p;
    double q;
    double thd;

    double h() const { return thd * std::hypot(p, q); }
};

// Run-relative switching plan of the bench loads.
const Load kFan{100.0, 28.0, 0.15};
const Load kLowElement{400.0, 2.0, 0.01};
const Load kHighElement{1000.0, 5.0, 0.01};
const Load kSway{60.0, 40.0, 0.12};
const Load kMagnetron{950.0, 150.0, 0.30};
const Load kMicrowaveAux{350.0, 100.0, 0.30};
const Load kLamp{150.0, 0.0, 0.02};

struct Switch {
    std::int64_t t;
    double sign;  // +1 on, -1 off
    std::vector<Load> loads;
    std::string label;
};

ApplianceTrace build_trace(const std::string& name, std::vector<Switch> switches, double inrush, std::int64_t end) {
    std::stable_sort(switches.begin(), switches.end(), [](const Switch& a, const Switch& b) { return a.t < b.t; });
    ApplianceTrace tr;
    tr.name = name;
    tr.phase = PhaseTag::A;
    double p = 0.0, q = 0.0, h = 0.0;
    for (std::size_t i = 0; i < switches.size(); ++i) {
        const auto& s = switches[i];
        double dp = 0.0, dq = 0.0, dh = 0.0;
        for (const auto& l : s.loads) {
            dp += s.sign * l.p;
            dq += s.sign * l.q;
            dh += s.sign * l.h();
        }
        p += dp;
        q += dq;
        h += dh;
        TruthEvent e;
        e.t = s.t;
        e.appliance = name;
        e.phase = PhaseTag::A;
        e.direction = dp > 0.0 ? Direction::On : Direction::Off;
        e.delta_p = dp;
        e.delta_q = dq;
        const double mag = std::hypot(dp, dq);
        if (mag > 0.0) e.thd = std::abs(dh) / mag;
        e.state = s.label;
        tr.events.push_back(e);
        if (inrush > 1.0 && e.direction == Direction::On && s.label == "E1") {
            tr.inrush.push_back({s.t, (inrush - 1.0) * dp, 2});
        }
        const std::int64_t next = i + 1 < switches.size() ? switches[i + 1].t : end;
        if (next > s.t && (std::abs(p) > 1e-9 || std::abs(q) > 1e-9)) tr.intervals.push_back({s.t, next, p, q, h});
    }
    return tr;
}

Load scaled(const Load& l, double k) { return {l.p * k, l.q * k, l.thd}; }

}  // namespace

ConditionRow heater_condition_row() {
    ConditionRow r;
    r.name = "heater";
    r.label = "Space heater";
    r.p_w = {300.0, 800.0};
    r.q_var = {0.0, 100.0};
    r.thd_pct = {0.0, 10.0};
    r.spike = SpikeRequirement::Yes;
    r.phase = PhaseCondition::Single;
    r.windows = {SearchWindow{0, 86400, DaySet::All}};
    r.avg_duration_min = 10.0;
    r.category = Category::LinearActive;
    r.weights = default_weights(r.category);
    return r;
}

HeaterLab heater_lab_scenarios(std::uint64_t seed) {
    Rng rng(seed, kBenchStream);
    HeaterLab lab;
    lab.run_kind = {1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 4, 4};
    for (int i = kRuns - 1; i > 0; --i) std::swap(lab.run_kind[i], lab.run_kind[rng.uniform_int(0, i)]);
    lab.element_repeats.assign(kRuns, 2);
    std::vector<int> idx(kRuns);
    for (int i = 0; i < kRuns; ++i) idx[i] = i;
    for (int i = kRuns - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(0, i)]);
    for (int i = 0; i < 3; ++i) lab.element_repeats[idx[i]] = 1;

    const std::int64_t end = kRuns * kRunSpacing;
    std::vector<Switch> heater, microwave, lamp;
    for (int r = 0; r < kRuns; ++r) {
        const std::int64_t s = kFirstRun + r * kRunSpacing;
        const double k = 1.0 + rng.uniform(-0.005, 0.005);
        const auto fan = scaled(kFan, k);
        const auto low = scaled(kLowElement, k);
        const auto high = scaled(kHighElement, k);
        heater.push_back({s, 1.0, {fan, low}, "E1"});
        for (int rep = 0; rep < lab.element_repeats[r]; ++rep) {
            heater.push_back({s + 60 + rep * 180, 1.0, {high}, "E2"});
            heater.push_back({s + 150 + rep * 180, -1.0, {high}, "E3"});
        }
        heater.push_back({s + 480, -1.0, {low}, "E4"});
        heater.push_back({s + 560, -1.0, {fan}, "E5"});
        const int kind = lab.run_kind[r];
        if (kind == 2) {
            const auto sway = scaled(kSway, k);
            heater.push_back({s + 500, 1.0, {sway}, "E6"});
            heater.push_back({s + 520, -1.0, {sway}, "E7"});
        }
        if (kind == 3 || kind == 4) {
            microwave.push_back({s + 100, 1.0, {kMagnetron, kMicrowaveAux}, "E8"});
            microwave.push_back({s + 200, -1.0, {kMicrowaveAux}, "E11"});
            microwave.push_back({s + 280, -1.0, {kMagnetron}, "E9"});
        }
        if (kind == 4) {
            lamp.push_back({s + 300, 1.0, {kLamp}, "E10"});
            lamp.push_back({s + 1200, -1.0, {kLamp}, "lamp off"});
        }
    }
    std::vector<ApplianceTrace> traces{build_trace("heater", heater, 2.5, end), build_trace("microwave", microwave, 1.0, end),
                                       build_trace("lamp", lamp, 1.0, end)};
    std::array<BaseLoad, 2> base{BaseLoad{20.0, 5.0, 0.03}, BaseLoad{}};
    lab.data = render_house(traces, base, 2.0, seed, default_epoch(), end);
    return lab;
}

HeaterBenchReport run_heater_bench(std::uint64_t seed, const PipelineParams& params) {
    const auto lab = heater_lab_scenarios(seed);
    const auto& rec = lab.data.recording;
    const auto events = detect_events(rec, params.detect);
    const auto res = run_appliance(rec, events, heater_condition_row(), params);

    HeaterBenchReport report;
    struct Expect {
        const char* id;
        std::size_t n;
        AssociationType type;
    };
    const Expect expected[] = {
        {"E1", 12, AssociationType::Single},     {"E2", 21, AssociationType::Repetitive},
        {"E3", 21, AssociationType::Repetitive}, {"E4", 12, AssociationType::Single},
        {"E5", 12, AssociationType::Single},     {"E6", 4, AssociationType::Occasional},
        {"E7", 4, AssociationType::Occasional},  {"E8", 3, AssociationType::Unrelated},
        {"E9", 3, AssociationType::Unrelated},   {"E10", 2, AssociationType::Unrelated},
        {"E11", 3, AssociationType::Unrelated},
    };
    if (!res.found) {
        for (const auto& e : expected) report.rows.push_back({e.id, e.n, e.type});
        report.pattern = "not found: " + res.reason;
        return report;
    }
    report.m = res.cycle.segments_used;
    report.pattern = res.cycle.pattern();

    // Label each class by the majority truth id of its members.
    const auto& truth = lab.data.truth.events;
    std::map<std::string, std::vector<const AssociatedEventClass*>> by_label;
    for (const auto& c : res.classes) {
        std::map<std::string, std::size_t> votes;
        for (const auto& m : c.cluster.members) {
            const TruthEvent* best = nullptr;
            for (const auto& t : truth) {
                if (t.direction != m.direction || std::llabs(t.t - m.t) > 2) continue;
                if (!best || std::llabs(t.t - m.t) < std::llabs(best->t - m.t)) best = &t;
            }
            if (best) ++votes[best->state];
        }
        std::string label = "?";
        std::size_t top = 0;
        for (const auto& [l, n] : votes) {
            if (n > top) {
                top = n;
                label = l;
            }
        }
        by_label[label].push_back(&c);
    }

    report.all_match = report.m == kRuns;
    for (const auto& e : expected) {
        HeaterBenchRow row{e.id, e.n, e.type};
        const auto it = by_label.find(e.id);
        if (it != by_label.end() && it->second.size() == 1) {
            const auto& c = *it->second.front();
            row.present = true;
            row.n = c.n_total;
            row.n_max = c.n_max;
            row.type = c.type;
            row.match = row.n == e.n && row.type == e.type;
        }
        report.all_match = report.all_match && row.match;
        report.rows.push_back(row);
    }
    return report;
}

std::string format_heater_report(const HeaterBenchReport& report, const AssociationParams& params) {
    auto criterion = [&](AssociationType t) -> std::string {
        switch (t) {
            case AssociationType::Single: return "N >= cM & n = 1";
            case AssociationType::Repetitive: return "N >= cM & n >= 2";
            case AssociationType::Occasional: return "bM <= N < cM";
            case AssociationType::Unrelated: return "N < bM";
        }
        return "?";
    };
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "Event association for heater (b = %g, c = %g)\n", params.b, params.c);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-13s %-8s %-18s %-11s %s\n", "Item", "Count", "Criterion", "Type", "Check");
    out += buf;
    std::snprintf(buf, sizeof buf, "%-13s M=%-6zu %-18s %-11s %s\n", "Data segment", report.m, "---", "---",
                  report.m == kRuns ? "ok" : "MISMATCH (expected M=12)");
    out += buf;
    for (const auto& r : report.rows) {
        std::string check = "ok";
        if (!r.present) {
            check = "MISMATCH (no unique class)";
        } else if (!r.match) {
            check = "MISMATCH (expected N=" + std::to_string(r.expected_n) + " " +
                    std::string(to_string(r.expected_type)) + ")";
        }
        const std::string count = r.present ? "N=" + std::to_string(r.n) : "-";
        std::snprintf(buf, sizeof buf, "%-13s %-8s %-18s %-11s %s\n", ("Event " + r.event.substr(1)).c_str(),
                      count.c_str(), r.present ? criterion(r.type).c_str() : "-",
                      r.present ? std::string(to_string(r.type)).c_str() : "-", check.c_str());
        out += buf;
    }
    out += "Pattern: " + report.pattern + "\n";
    std::size_t ok = 0;
    for (const auto& r : report.rows) ok += r.match ? 1 : 0;
    std::snprintf(buf, sizeof buf, "%zu/%zu association types match%s\n", ok, report.rows.size(),
                  report.all_match ? "" : " -- MISMATCH");
    out += buf;
    return out;
}

}  // namespace loadsig
