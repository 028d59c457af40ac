#include "loadsig/synthhome.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "jsonutil.hpp"
#include "loadsig/error.hpp"
#include "loadsig/rng.hpp"
#include "loadsig_embedded_data.hpp"

namespace loadsig {

namespace {

using jsonutil::json;

constexpr std::uint64_t kHouseNoiseStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kModelNoiseStreamBase = 0x5bd1e995ULL << 20;

std::string idx_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

ComponentSpec component_from_json(const json& j, const std::string& path) {
    ComponentSpec c;
    c.name = jsonutil::string(jsonutil::require(j, "name", path), path + ".name");
    c.p = jsonutil::non_negative(jsonutil::require(j, "P_W", path), path + ".P_W");
    c.q = jsonutil::number(jsonutil::require(j, "Q_var", path), path + ".Q_var");
    c.thd = jsonutil::non_negative(jsonutil::require(j, "THD_pct", path), path + ".THD_pct") / 100.0;
    return c;
}

std::vector<SearchWindow> windows_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) jsonutil::fail(path, "expected an array");
    std::vector<SearchWindow> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto wp = idx_path(path, i);
        SearchWindow w;
        w.start_s = jsonutil::clock_seconds(jsonutil::require(j[i], "start", wp), wp + ".start");
        w.end_s = jsonutil::clock_seconds(jsonutil::require(j[i], "end", wp), wp + ".end");
        if (jsonutil::has(j[i], "days")) {
            const auto d = jsonutil::string(j[i]["days"], wp + ".days");
            if (d == "all") w.days = DaySet::All;
            else if (d == "weekday") w.days = DaySet::Weekday;
            else if (d == "weekend") w.days = DaySet::Weekend;
            else jsonutil::fail(wp + ".days", "expected all, weekday or weekend");
        }
        if (w.start_s >= w.end_s) jsonutil::fail(wp, "window must satisfy start < end within one day");
        out.push_back(w);
    }
    return out;
}

std::pair<int, int> int_pair(const json& j, const std::string& path) {
    const auto r = jsonutil::range(j, path);
    if (r.lo != std::floor(r.lo) || r.hi != std::floor(r.hi)) jsonutil::fail(path, "expected integers");
    return {static_cast<int>(r.lo), static_cast<int>(r.hi)};
}

ApplianceModel model_from_json(const json& j, const std::string& path) {
    ApplianceModel m;
    m.name = jsonutil::string(jsonutil::require(j, "name", path), path + ".name");
    try {
        m.phase = parse_phase_tag(jsonutil::string(jsonutil::require(j, "phase", path), path + ".phase"));
    } catch (const Error& e) {
        jsonutil::fail(path + ".phase", e.what());
    }
    const auto& comps = jsonutil::require(j, "components", path);
    if (!comps.is_array()) jsonutil::fail(path + ".components", "expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) m.components.push_back(component_from_json(comps[i], idx_path(path + ".components", i)));

    const auto& states = jsonutil::require(j, "states", path);
    if (!states.is_array()) jsonutil::fail(path + ".states", "expected an array");
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto sp = idx_path(path + ".states", i);
        StateSpec s;
        s.name = jsonutil::string(jsonutil::require(states[i], "name", sp), sp + ".name");
        const auto& sc = jsonutil::require(states[i], "components", sp);
        if (!sc.is_array()) jsonutil::fail(sp + ".components", "expected an array");
        for (std::size_t k = 0; k < sc.size(); ++k) s.components.push_back(jsonutil::string(sc[k], idx_path(sp + ".components", k)));
        s.duration_s = jsonutil::range(jsonutil::require(states[i], "duration_s", sp), sp + ".duration_s");
        if (jsonutil::has(states[i], "inrush")) s.inrush = jsonutil::number(states[i]["inrush"], sp + ".inrush");
        m.states.push_back(std::move(s));
    }

    const auto& seq = jsonutil::require(j, "sequence", path);
    if (!seq.is_array()) jsonutil::fail(path + ".sequence", "expected an array");
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto qp = idx_path(path + ".sequence", i);
        SequenceItem item;
        const auto& st = jsonutil::require(seq[i], "states", qp);
        if (!st.is_array()) jsonutil::fail(qp + ".states", "expected an array");
        for (std::size_t k = 0; k < st.size(); ++k) item.states.push_back(jsonutil::string(st[k], idx_path(qp + ".states", k)));
        if (jsonutil::has(seq[i], "repeat")) std::tie(item.repeat_min, item.repeat_max) = int_pair(seq[i]["repeat"], qp + ".repeat");
        m.sequence.push_back(std::move(item));
    }

    if (jsonutil::has(j, "occasional")) {
        const auto& occ = j["occasional"];
        if (!occ.is_array()) jsonutil::fail(path + ".occasional", "expected an array");
        for (std::size_t i = 0; i < occ.size(); ++i) {
            const auto op = idx_path(path + ".occasional", i);
            OccasionalSpec o;
            o.load = component_from_json(occ[i], op);
            o.probability = jsonutil::number(jsonutil::require(occ[i], "probability", op), op + ".probability");
            o.offset_s = jsonutil::range(jsonutil::require(occ[i], "offset_s", op), op + ".offset_s");
            o.duration_s = jsonutil::range(jsonutil::require(occ[i], "duration_s", op), op + ".duration_s");
            m.occasional.push_back(std::move(o));
        }
    }

    const auto sp = path + ".schedule";
    const auto& sch = jsonutil::require(j, "schedule", path);
    const auto kind = jsonutil::string(jsonutil::require(sch, "kind", sp), sp + ".kind");
    if (kind == "periodic") {
        m.schedule.kind = ScheduleKind::Periodic;
        m.schedule.off_s = jsonutil::range(jsonutil::require(sch, "off_s", sp), sp + ".off_s");
    } else if (kind == "random") {
        m.schedule.kind = ScheduleKind::Random;
        std::tie(m.schedule.per_day_min, m.schedule.per_day_max) = int_pair(jsonutil::require(sch, "per_day", sp), sp + ".per_day");
    } else {
        jsonutil::fail(sp + ".kind", "expected periodic or random");
    }
    if (jsonutil::has(sch, "windows")) m.schedule.windows = windows_from_json(sch["windows"], sp + ".windows");

    if (jsonutil::has(j, "noise_sigma_W")) m.noise_sigma = jsonutil::non_negative(j["noise_sigma_W"], path + ".noise_sigma_W");
    if (jsonutil::has(j, "jitter")) m.jitter = jsonutil::non_negative(j["jitter"], path + ".jitter");
    if (jsonutil::has(j, "inrush_decay_s")) m.inrush_decay_s = static_cast<int>(jsonutil::integer(j["inrush_decay_s"], path + ".inrush_decay_s"));
    return m;
}

const ComponentSpec& component(const ApplianceModel& m, const std::string& name) {
    for (const auto& c : m.components) {
        if (c.name == name) return c;
    }
    throw Error(ErrorKind::Config, "appliance '" + m.name + "': unknown component '" + name + "'");
}

std::size_t state_index(const ApplianceModel& m, const std::string& name) {
    for (std::size_t i = 0; i < m.states.size(); ++i) {
        if (m.states[i].name == name) return i;
    }
    throw Error(ErrorKind::Config, "appliance '" + m.name + "': unknown state '" + name + "'");
}

struct Level {
    double p = 0.0;
    double q = 0.0;
    double h = 0.0;
};

Level level_of(const ComponentSpec& c, double scale) {
    return {c.p * scale, c.q * scale, c.thd * std::hypot(c.p, c.q) * scale};
}

Level state_level(const ApplianceModel& m, const StateSpec& s, double scale) {
    Level l;
    for (const auto& name : s.components) {
        const auto c = level_of(component(m, name), scale);
        l.p += c.p;
        l.q += c.q;
        l.h += c.h;
    }
    return l;
}

std::string change_label(const ApplianceModel& m, const std::vector<std::string>& from, const std::vector<std::string>& to) {
    std::string label;
    for (const auto& c : m.components) {
        const bool in_from = std::find(from.begin(), from.end(), c.name) != from.end();
        const bool in_to = std::find(to.begin(), to.end(), c.name) != to.end();
        if (in_to && !in_from) label += "+" + c.name;
        if (in_from && !in_to) label += "-" + c.name;
    }
    return label;
}

std::vector<std::string> sorted_set(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::optional<double> switched_thd(double dp, double dq, double dh) {
    const double s = std::hypot(dp, dq);
    if (s < 1e-12) return std::nullopt;
    return std::abs(dh) / s;
}

struct CyclePlan {
    std::vector<std::pair<std::size_t, std::int64_t>> states;  // (state, seconds)
    std::int64_t duration = 0;
    double scale = 1.0;
    struct Occ {
        std::size_t req;
        std::int64_t offset;
        std::int64_t duration;
    };
    std::vector<Occ> occasional;
};

CyclePlan plan_cycle(const ApplianceModel& m, Rng& rng) {
    CyclePlan plan;
    plan.scale = 1.0 + rng.uniform(-m.jitter, m.jitter);
    for (const auto& item : m.sequence) {
        const auto reps = rng.uniform_int(item.repeat_min, item.repeat_max);
        for (std::int64_t r = 0; r < reps; ++r) {
            for (const auto& name : item.states) {
                const auto si = state_index(m, name);
                const auto& st = m.states[si];
                const auto d = rng.uniform_int(static_cast<std::int64_t>(st.duration_s.lo),
                                               static_cast<std::int64_t>(st.duration_s.hi));
                plan.states.emplace_back(si, d);
                plan.duration += d;
            }
        }
    }
    for (std::size_t k = 0; k < m.occasional.size(); ++k) {
        const auto& o = m.occasional[k];
        if (!rng.bernoulli(o.probability)) continue;
        const auto dur = rng.uniform_int(static_cast<std::int64_t>(o.duration_s.lo), static_cast<std::int64_t>(o.duration_s.hi));
        auto off = rng.uniform_int(static_cast<std::int64_t>(o.offset_s.lo), static_cast<std::int64_t>(o.offset_s.hi));
        off = std::min(off, std::max<std::int64_t>(0, plan.duration - dur - 1));
        plan.occasional.push_back({k, off, dur});
    }
    return plan;
}

void emit_cycle(const ApplianceModel& m, const CyclePlan& plan, std::int64_t start, std::int64_t end,
                ApplianceTrace& trace) {
    auto push_event = [&](std::int64_t t, double dp, double dq, double dh, std::string label) {
        if (t < 0 || t >= end || dp == 0.0) return;
        TruthEvent e;
        e.t = t;
        e.appliance = m.name;
        e.phase = m.phase;
        e.direction = dp > 0.0 ? Direction::On : Direction::Off;
        e.delta_p = dp;
        e.delta_q = dq;
        e.thd = switched_thd(dp, dq, dh);
        e.state = std::move(label);
        trace.events.push_back(std::move(e));
    };
    auto push_interval = [&](std::int64_t t0, std::int64_t t1, const Level& l) {
        t0 = std::max<std::int64_t>(t0, 0);
        t1 = std::min(t1, end);
        if (t1 > t0 && (l.p != 0.0 || l.q != 0.0 || l.h != 0.0)) trace.intervals.push_back({t0, t1, l.p, l.q, l.h});
    };

    if (start < end) trace.cycle_starts.push_back(start);
    std::vector<std::string> prev_set;
    Level prev;
    std::int64_t t = start;
    for (const auto& [si, d] : plan.states) {
        const auto& st = m.states[si];
        const auto set = sorted_set(st.components);
        const auto lvl = state_level(m, st, plan.scale);
        if (set != prev_set) {
            const double dp = lvl.p - prev.p;
            push_event(t, dp, lvl.q - prev.q, lvl.h - prev.h, change_label(m, prev_set, set));
            if (st.inrush > 1.0 && dp > 0.0 && t >= 0 && t < end) trace.inrush.push_back({t, (st.inrush - 1.0) * dp, m.inrush_decay_s});
        }
        push_interval(t, t + d, lvl);
        prev_set = set;
        prev = lvl;
        t += d;
    }
    if (!prev_set.empty()) push_event(t, -prev.p, -prev.q, -prev.h, change_label(m, prev_set, {}));

    for (const auto& o : plan.occasional) {
        const auto& req = m.occasional[o.req];
        const auto lvl = level_of(req.load, plan.scale);
        const auto t0 = start + o.offset;
        push_interval(t0, t0 + o.duration, lvl);
        push_event(t0, lvl.p, lvl.q, lvl.h, "+" + req.load.name);
        push_event(t0 + o.duration, -lvl.p, -lvl.q, -lvl.h, "-" + req.load.name);
    }
}

// Earliest t' >= t inside one of the windows, or `limit` if none before it.
std::int64_t next_allowed(const std::vector<SearchWindow>& windows, const Epoch& epoch, std::int64_t t,
                          std::int64_t limit) {
    if (windows.empty()) return t;
    for (std::int64_t day = epoch.day_start(t); day < limit; day += 86400) {
        const unsigned wd = epoch.weekday(day);
        std::int64_t best = limit;
        for (const auto& w : windows) {
            if (!w.applies_on(wd)) continue;
            const std::int64_t ws = day + w.start_s;
            const std::int64_t we = day + w.end_s;
            if (t < we) best = std::min(best, std::max(t, ws));
        }
        if (best < limit) return best;
    }
    return limit;
}

std::int64_t to_i64(double v) { return static_cast<std::int64_t>(v); }

// Percent text that parses and divides back to exactly `fraction`.
std::string percent_text(double fraction) {
    const double pct = fraction * 100.0;
    double up = pct;
    double down = pct;
    for (int k = 0; k < 8; ++k) {
        if (up / 100.0 == fraction) return format_exact(up);
        if (down / 100.0 == fraction) return format_exact(down);
        up = std::nextafter(up, HUGE_VAL);
        down = std::nextafter(down, -HUGE_VAL);
    }
    return format_exact(pct);
}

}  // namespace

void Scenario::validate() const {
    if (days < 1) throw Error(ErrorKind::Config, "scenario.days: must be at least 1");
    if (noise_sigma < 0.0) throw Error(ErrorKind::Config, "scenario.noise_sigma_W: must be non-negative");
    std::set<std::string> names;
    for (std::size_t i = 0; i < appliances.size(); ++i) {
        const auto& m = appliances[i];
        const auto path = idx_path("scenario.appliances", i);
        auto bad = [&](const std::string& field, const std::string& msg) {
            throw Error(ErrorKind::Config, path + field + ": " + msg);
        };
        if (m.name.empty()) bad(".name", "must not be empty");
        if (!names.insert(m.name).second) bad(".name", "duplicate appliance '" + m.name + "'");
        for (std::size_t s = 0; s < m.states.size(); ++s) {
            const auto& st = m.states[s];
            const auto sp = idx_path(".states", s);
            if (st.duration_s.lo < 1.0 || st.duration_s.lo != std::floor(st.duration_s.lo) ||
                st.duration_s.hi != std::floor(st.duration_s.hi)) {
                bad(sp + ".duration_s", "durations must be whole seconds >= 1");
            }
            if (st.inrush < 1.0) bad(sp + ".inrush", "multiplier must be >= 1");
            for (const auto& c : st.components) {
                try {
                    component(m, c);
                } catch (const Error& e) {
                    bad(sp + ".components", e.what());
                }
            }
        }
        if (m.sequence.empty()) bad(".sequence", "must not be empty");
        for (std::size_t k = 0; k < m.sequence.size(); ++k) {
            const auto& item = m.sequence[k];
            const auto qp = idx_path(".sequence", k);
            if (item.states.empty()) bad(qp + ".states", "must not be empty");
            if (item.repeat_min < 1 || item.repeat_min > item.repeat_max) bad(qp + ".repeat", "need 1 <= min <= max");
            for (const auto& s : item.states) {
                try {
                    state_index(m, s);
                } catch (const Error& e) {
                    bad(qp + ".states", e.what());
                }
            }
        }
        for (std::size_t k = 0; k < m.occasional.size(); ++k) {
            const auto& o = m.occasional[k];
            if (o.probability < 0.0 || o.probability > 1.0) bad(idx_path(".occasional", k) + ".probability", "must lie in [0, 1]");
        }
        for (const auto& w : m.schedule.windows) {
            if (w.start_s < 0 || w.end_s > 86400 || w.start_s >= w.end_s) bad(".schedule.windows", "window exceeds one day");
        }
        if (m.schedule.kind == ScheduleKind::Periodic && m.schedule.off_s.lo < 1.0) bad(".schedule.off_s", "must be >= 1 s");
        if (m.schedule.kind == ScheduleKind::Random &&
            (m.schedule.per_day_min < 0 || m.schedule.per_day_min > m.schedule.per_day_max)) {
            bad(".schedule.per_day", "need 0 <= min <= max");
        }
        if (m.jitter >= 1.0) bad(".jitter", "must be below 1");
        if (m.inrush_decay_s < 1) bad(".inrush_decay_s", "must be >= 1");
    }
}

Scenario parse_scenario(std::string_view json_text) {
    const auto j = jsonutil::parse(json_text, "scenario");
    const std::string path = "scenario";
    Scenario sc;
    sc.name = jsonutil::has(j, "name") ? jsonutil::string(j["name"], path + ".name") : "unnamed";
    if (jsonutil::has(j, "epoch")) {
        try {
            sc.epoch = Epoch::parse(jsonutil::string(j["epoch"], path + ".epoch"));
        } catch (const Error& e) {
            jsonutil::fail(path + ".epoch", e.what());
        }
    } else {
        sc.epoch = default_epoch();
        sc.epoch.explicit_value = true;
    }
    if (jsonutil::has(j, "days")) sc.days = static_cast<int>(jsonutil::integer(j["days"], path + ".days"));
    if (jsonutil::has(j, "noise_sigma_W")) sc.noise_sigma = jsonutil::non_negative(j["noise_sigma_W"], path + ".noise_sigma_W");
    if (jsonutil::has(j, "base_load")) {
        const auto& b = j["base_load"];
        for (Phase ph : {Phase::A, Phase::B}) {
            const std::string key(to_string(ph));
            if (!jsonutil::has(b, key)) continue;
            const auto bp = path + ".base_load." + key;
            auto& base = sc.base[static_cast<int>(ph)];
            base.p = jsonutil::non_negative(jsonutil::require(b[key], "P_W", bp), bp + ".P_W");
            base.q = jsonutil::number(jsonutil::require(b[key], "Q_var", bp), bp + ".Q_var");
            base.thd = jsonutil::non_negative(jsonutil::require(b[key], "THD_pct", bp), bp + ".THD_pct") / 100.0;
        }
    }
    const auto& apps = jsonutil::require(j, "appliances", path);
    if (!apps.is_array()) jsonutil::fail(path + ".appliances", "expected an array");
    for (std::size_t i = 0; i < apps.size(); ++i) sc.appliances.push_back(model_from_json(apps[i], idx_path(path + ".appliances", i)));
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open scenario " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

Scenario default_scenario() { return parse_scenario(embedded::scenario_default); }

// ---------------------------------------------------------------------------

ApplianceTrace plan_appliance(const ApplianceModel& m, std::size_t index, std::uint64_t seed, const Epoch& epoch,
                              int days, std::vector<int>* draws) {
    Rng rng(seed, index + 1);
    ApplianceTrace trace;
    trace.name = m.name;
    trace.phase = m.phase;
    trace.noise_sigma = m.noise_sigma;
    trace.noise_stream = kModelNoiseStreamBase + index;
    const std::int64_t end = static_cast<std::int64_t>(days) * 86400;
    const auto& sch = m.schedule;

    if (sch.kind == ScheduleKind::Periodic) {
        std::int64_t t = rng.uniform_int(0, to_i64(sch.off_s.hi));
        while (true) {
            t = next_allowed(sch.windows, epoch, t, end);
            if (t >= end) break;
            const auto plan = plan_cycle(m, rng);
            emit_cycle(m, plan, t, end, trace);
            t += plan.duration + rng.uniform_int(to_i64(sch.off_s.lo), to_i64(sch.off_s.hi));
        }
    } else {
        for (std::int64_t day = epoch.day_start(0); day < end; day += 86400) {
            const unsigned wd = epoch.weekday(day);
            std::vector<SearchWindow> today;
            if (sch.windows.empty()) today.push_back({0, 86400, DaySet::All});
            for (const auto& w : sch.windows) {
                if (w.applies_on(wd)) today.push_back(w);
            }
            if (today.empty()) continue;
            std::sort(today.begin(), today.end(), [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
            double total = 0.0;
            for (const auto& w : today) total += w.end_s - w.start_s;
            const auto n = static_cast<int>(rng.uniform_int(sch.per_day_min, sch.per_day_max));
            if (draws) draws->push_back(n);
            if (n == 0) continue;
            const double slot = total / n;
            for (int i = 0; i < n; ++i) {
                const auto plan = plan_cycle(m, rng);
                if (static_cast<double>(plan.duration) > slot) {
                    throw Error(ErrorKind::Config, "appliance '" + m.name + "': a " + std::to_string(plan.duration) +
                                                       " s cycle does not fit its schedule windows");
                }
                double off = slot * i + rng.uniform(0.0, slot - static_cast<double>(plan.duration));
                std::int64_t start = day;
                for (const auto& w : today) {
                    const double len = w.end_s - w.start_s;
                    if (off < len) {
                        start = day + w.start_s + static_cast<std::int64_t>(std::floor(off));
                        break;
                    }
                    off -= len;
                }
                emit_cycle(m, plan, start, end, trace);
            }
        }
    }
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const TruthEvent& a, const TruthEvent& b) { return a.t < b.t; });
    return trace;
}

void render_trace(const ApplianceTrace& trace, std::uint64_t seed, std::array<PhaseSeries, 2>& series) {
    const auto len = static_cast<std::int64_t>(series[0].p.size());
    const bool both = trace.phase == PhaseTag::AB;
    const double share = both ? 0.5 : 1.0;
    std::vector<int> legs;
    if (trace.phase != PhaseTag::B) legs.push_back(0);
    if (trace.phase != PhaseTag::A) legs.push_back(1);

    for (const auto& iv : trace.intervals) {
        for (std::int64_t t = std::max<std::int64_t>(iv.t0, 0); t < std::min(iv.t1, len); ++t) {
            for (int leg : legs) {
                auto& s = series[leg];
                const auto k = static_cast<std::size_t>(t);
                s.p[k] += iv.p * share;
                s.q[k] += iv.q * share;
                s.h[k] += iv.h * share;
            }
        }
    }
    for (const auto& pulse : trace.inrush) {
        for (int k = 0; k < pulse.decay_s; ++k) {
            const auto t = pulse.t + k;
            if (t < 0 || t >= len) continue;
            const double extra = pulse.extra_p * (1.0 - static_cast<double>(k) / pulse.decay_s);
            for (int leg : legs) series[leg].p[static_cast<std::size_t>(t)] += extra * share;
        }
    }
    if (trace.noise_sigma > 0.0) {
        Rng rng(seed, trace.noise_stream);
        const double sigma = trace.noise_sigma * (both ? std::sqrt(0.5) : 1.0);
        for (const auto& iv : trace.intervals) {
            for (std::int64_t t = std::max<std::int64_t>(iv.t0, 0); t < std::min(iv.t1, len); ++t) {
                for (int leg : legs) series[leg].p[static_cast<std::size_t>(t)] += rng.normal(0.0, sigma);
            }
        }
    }
}

SynthResult render_house(const std::vector<ApplianceTrace>& traces, const std::array<BaseLoad, 2>& base,
                         double noise_sigma, std::uint64_t seed, const Epoch& epoch, std::int64_t duration) {
    std::array<PhaseSeries, 2> series;
    for (int leg = 0; leg < 2; ++leg) {
        const auto& b = base[leg];
        const auto n = static_cast<std::size_t>(duration);
        series[leg].p.assign(n, b.p);
        series[leg].q.assign(n, b.q);
        series[leg].h.assign(n, b.thd * std::hypot(b.p, b.q));
    }
    SynthResult out;
    for (const auto& tr : traces) {
        render_trace(tr, seed, series);
        out.truth.cycle_starts[tr.name] = tr.cycle_starts;
        out.truth.events.insert(out.truth.events.end(), tr.events.begin(), tr.events.end());
    }
    std::stable_sort(out.truth.events.begin(), out.truth.events.end(),
                     [](const TruthEvent& a, const TruthEvent& b) { return a.t < b.t; });

    Rng rng(seed, kHouseNoiseStream);
    out.recording = MeterRecording(epoch, 0, duration);
    for (std::int64_t t = 0; t < duration; ++t) {
        for (Phase ph : {Phase::A, Phase::B}) {
            const auto& s = series[static_cast<int>(ph)];
            const auto k = static_cast<std::size_t>(t);
            PowerSample ps;
            ps.t = t;
            ps.phase = ph;
            ps.p = std::max(0.0, s.p[k] + (noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0));
            ps.q = s.q[k] + (noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0);
            const double mag = std::hypot(ps.p, ps.q);
            if (mag > 1e-9) ps.thd = s.h[k] / mag;
            out.recording.set_sample(ps);
        }
    }
    out.recording.finalize();
    out.truth.clean = std::move(series);
    return out;
}

SynthResult generate(const Scenario& scenario, std::uint64_t seed, int days) {
    scenario.validate();
    if (days < 1) throw Error(ErrorKind::Config, "days must be at least 1");
    std::vector<ApplianceTrace> traces;
    std::map<std::string, std::vector<int>> draws;
    for (std::size_t i = 0; i < scenario.appliances.size(); ++i) {
        const auto& m = scenario.appliances[i];
        std::vector<int> d;
        traces.push_back(plan_appliance(m, i, seed, scenario.epoch, days, &d));
        if (m.schedule.kind == ScheduleKind::Random) draws[m.name] = std::move(d);
    }
    auto out = render_house(traces, scenario.base, scenario.noise_sigma, seed, scenario.epoch,
                            static_cast<std::int64_t>(days) * 86400);
    out.truth.draws_per_day = std::move(draws);
    return out;
}

// ---------------------------------------------------------------------------

CurrentSpectrum load_spectrum(double p, double q, double h, double voltage_rms) {
    CurrentSpectrum s;
    s.phasors[0] = std::complex<double>(p, -q) / voltage_rms;
    // Odd-harmonic shape falling as 1/k, scaled to unit RMS.
    double norm = 0.0;
    for (std::size_t k = 1; k < kHarmonicOrders.size(); ++k) norm += 1.0 / (kHarmonicOrders[k] * kHarmonicOrders[k]);
    norm = std::sqrt(norm);
    const double total = h / voltage_rms;
    for (std::size_t k = 1; k < kHarmonicOrders.size(); ++k) {
        s.phasors[k] = total * (1.0 / kHarmonicOrders[k]) / norm;
    }
    return s;
}

WaveformFile synthesize_waveforms(const MeterRecording& rec, std::int64_t t0, std::int64_t t1, double voltage_rms) {
    WaveformFile file;
    file.epoch = rec.epoch();
    t0 = std::max(t0, rec.start());
    t1 = std::min(t1, rec.end());
    for (std::int64_t t = t0; t < t1; ++t) {
        for (Phase ph : {Phase::A, Phase::B}) {
            if (!rec.present(ph, t)) continue;
            const auto& c = rec.columns(ph);
            const auto k = static_cast<std::size_t>(t - rec.start());
            const double h = std::isnan(c.thd[k]) ? 0.0 : c.thd[k] * std::hypot(c.p[k], c.q[k]);
            FrameSynthesis req;
            req.t = t;
            req.phase = ph;
            req.voltage_rms = voltage_rms;
            req.current = load_spectrum(c.p[k], c.q[k], h, voltage_rms);
            file.frames.push_back(synthesize_frame(req));
        }
    }
    return file;
}

// ---------------------------------------------------------------------------

std::string format_truth_csv(const std::vector<TruthEvent>& events) {
    std::string out = "t_s,appliance,direction,dP_W,dQ_var,THD_pct,state\n";
    for (const auto& e : events) {
        out += std::to_string(e.t) + ',' + e.appliance + ',' + std::string(to_string(e.direction)) + ',' +
               format_exact(e.delta_p) + ',' + format_exact(e.delta_q) + ',';
        if (e.thd) out += percent_text(*e.thd);
        out += ',' + e.state + '\n';
    }
    return out;
}

std::vector<TruthEvent> parse_truth_csv(std::string_view text) {
    std::vector<TruthEvent> out;
    std::size_t line_no = 0;
    bool header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header) {
            if (line != "t_s,appliance,direction,dP_W,dQ_var,THD_pct,state") {
                throw Error(ErrorKind::Data, "truth file line " + std::to_string(line_no) + ": unexpected header");
            }
            header = true;
            continue;
        }
        std::vector<std::string_view> f;
        std::size_t s = 0;
        while (true) {
            const auto c = line.find(',', s);
            f.push_back(line.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
            if (c == std::string_view::npos) break;
            s = c + 1;
        }
        const auto where = "truth file line " + std::to_string(line_no) + ": ";
        if (f.size() != 7) throw Error(ErrorKind::Data, where + "expected 7 fields");
        try {
            TruthEvent e;
            const double t = parse_double(f[0], "t_s");
            if (t != std::floor(t)) throw Error(ErrorKind::Data, "non-integer t_s");
            e.t = static_cast<std::int64_t>(t);
            e.appliance = std::string(f[1]);
            e.direction = parse_direction(f[2]);
            e.delta_p = parse_double(f[3], "dP_W");
            e.delta_q = parse_double(f[4], "dQ_var");
            if (!f[5].empty()) e.thd = parse_double(f[5], "THD_pct") / 100.0;
            e.state = std::string(f[6]);
            out.push_back(std::move(e));
        } catch (const Error& e) {
            throw Error(ErrorKind::Data, where + e.what());
        }
    }
    if (!header) throw Error(ErrorKind::Data, "truth file: missing header");
    return out;
}

std::vector<TruthEvent> load_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_truth_csv(ss.str());
}

}  // namespace loadsig
