#include "loadsig/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jsonutil.hpp"
#include "loadsig/error.hpp"
#include "loadsig_embedded_data.hpp"

namespace loadsig {

std::string_view to_string(SpikeRequirement s) {
    switch (s) {
        case SpikeRequirement::Yes: return "yes";
        case SpikeRequirement::No: return "no";
        case SpikeRequirement::Either: return "either";
    }
    return "?";
}

std::string_view to_string(PhaseCondition p) { return p == PhaseCondition::Single ? "single" : "double"; }

std::string_view to_string(Category c) {
    switch (c) {
        case Category::LinearActive: return "linear_active";
        case Category::LinearReactive: return "linear_reactive";
        case Category::NonlinearActive: return "nonlinear_active";
        case Category::NonlinearReactive: return "nonlinear_reactive";
    }
    return "?";
}

std::string_view to_string(DaySet d) {
    switch (d) {
        case DaySet::All: return "all";
        case DaySet::Weekday: return "weekday";
        case DaySet::Weekend: return "weekend";
    }
    return "?";
}

Weights default_weights(Category c) {
    switch (c) {
        case Category::LinearReactive: return {0.45, 0.45, 0.10};
        case Category::LinearActive: return {0.60, 0.10, 0.30};
        case Category::NonlinearActive: return {0.45, 0.10, 0.45};
        case Category::NonlinearReactive: return {0.40, 0.30, 0.30};
    }
    return {};
}

bool SearchWindow::applies_on(unsigned weekday) const {
    const bool weekend = weekday == 0 || weekday == 6;
    switch (days) {
        case DaySet::All: return true;
        case DaySet::Weekday: return !weekend;
        case DaySet::Weekend: return weekend;
    }
    return false;
}

void ConditionRow::validate() const {
    const std::string where = "condition row '" + name + "'";
    auto bad = [&](const std::string& field, const std::string& msg) {
        throw Error(ErrorKind::Config, where + " " + field + ": " + msg);
    };
    if (name.empty()) throw Error(ErrorKind::Config, "condition row without a name");
    for (const auto& [field, r] : {std::pair{"P_W", p_w}, std::pair{"Q_var", q_var}, std::pair{"THD_pct", thd_pct}}) {
        if (r.lo < 0.0 || r.hi < 0.0) bad(field, "bounds must be non-negative");
        if (r.lo > r.hi) bad(field, "min exceeds max");
    }
    if (!(avg_duration_min > 0.0)) bad("avg_duration_min", "must be positive");
    if (weights.p < 0.0 || weights.q < 0.0 || weights.h < 0.0) bad("weights", "must be non-negative");
    if (std::abs(weights.p + weights.q + weights.h - 1.0) > 1e-9) bad("weights", "must sum to 1");
    if (windows.empty()) bad("windows", "at least one search window is required");
    for (const auto& w : windows) {
        if (w.start_s < 0 || w.end_s > 86400 || w.start_s >= w.end_s) bad("windows", "window must satisfy start < end <= 24:00");
    }
    // Windows may not overlap on any weekday.
    for (unsigned day = 0; day < 7; ++day) {
        std::vector<std::pair<int, int>> spans;
        for (const auto& w : windows) {
            if (w.applies_on(day)) spans.emplace_back(w.start_s, w.end_s);
        }
        std::sort(spans.begin(), spans.end());
        for (std::size_t i = 1; i < spans.size(); ++i) {
            if (spans[i].first < spans[i - 1].second) bad("windows", "windows overlap within a day");
        }
    }
}

namespace jsonutil {

json to_json(const ConditionRow& row) {
    json j;
    j["name"] = row.name;
    j["label"] = row.label;
    j["P_W"] = {row.p_w.lo, row.p_w.hi};
    j["Q_var"] = {row.q_var.lo, row.q_var.hi};
    j["THD_pct"] = {row.thd_pct.lo, row.thd_pct.hi};
    j["spike"] = to_string(row.spike);
    j["phase"] = to_string(row.phase);
    j["windows"] = json::array();
    for (const auto& w : row.windows) {
        j["windows"].push_back(
            {{"start", format_clock(w.start_s)}, {"end", format_clock(w.end_s)}, {"days", to_string(w.days)}});
    }
    j["avg_duration_min"] = row.avg_duration_min;
    j["category"] = to_string(row.category);
    j["weights"] = {row.weights.p, row.weights.q, row.weights.h};
    return j;
}

namespace {

template <typename E, std::size_t N>
E parse_enum(const json& j, const std::string& path, const std::array<E, N>& values) {
    const auto s = string(j, path);
    std::string allowed;
    for (E v : values) {
        if (s == to_string(v)) return v;
        allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(v));
    }
    fail(path, "unknown value '" + s + "' (expected one of " + allowed + ")");
}

}  // namespace

ConditionRow condition_row_from_json(const json& j, const std::string& path) {
    ConditionRow row;
    row.name = string(require(j, "name", path), path + ".name");
    row.label = has(j, "label") ? string(j["label"], path + ".label") : row.name;
    row.p_w = range(require(j, "P_W", path), path + ".P_W");
    row.q_var = range(require(j, "Q_var", path), path + ".Q_var");
    row.thd_pct = range(require(j, "THD_pct", path), path + ".THD_pct");
    row.spike = parse_enum(require(j, "spike", path), path + ".spike",
                           std::array{SpikeRequirement::Yes, SpikeRequirement::No, SpikeRequirement::Either});
    row.phase = parse_enum(require(j, "phase", path), path + ".phase",
                           std::array{PhaseCondition::Single, PhaseCondition::Double});
    const auto& windows = require(j, "windows", path);
    if (!windows.is_array()) fail(path + ".windows", "expected an array");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto wp = path + ".windows[" + std::to_string(i) + "]";
        SearchWindow w;
        w.start_s = clock_seconds(require(windows[i], "start", wp), wp + ".start");
        w.end_s = clock_seconds(require(windows[i], "end", wp), wp + ".end");
        if (has(windows[i], "days")) {
            w.days = parse_enum(windows[i]["days"], wp + ".days", std::array{DaySet::All, DaySet::Weekday, DaySet::Weekend});
        }
        if (w.start_s >= w.end_s) fail(wp, "start must be before end");
        row.windows.push_back(w);
    }
    row.avg_duration_min = number(require(j, "avg_duration_min", path), path + ".avg_duration_min");
    row.category = parse_enum(require(j, "category", path), path + ".category",
                              std::array{Category::LinearActive, Category::LinearReactive, Category::NonlinearActive,
                                         Category::NonlinearReactive});
    row.weights = default_weights(row.category);
    if (has(j, "weights")) {
        const auto& w = j["weights"];
        if (!w.is_array() || w.size() != 3) fail(path + ".weights", "expected [w_p, w_q, w_h]");
        row.weights = {number(w[0], path + ".weights[0]"), number(w[1], path + ".weights[1]"),
                       number(w[2], path + ".weights[2]")};
    }
    try {
        row.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return row;
}

}  // namespace jsonutil

std::vector<ConditionRow> parse_condition_table(std::string_view json_text) {
    const auto j = jsonutil::parse(json_text, "condition table");
    if (!j.is_array()) jsonutil::fail("conditions", "expected an array of rows");
    std::vector<ConditionRow> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        rows.push_back(jsonutil::condition_row_from_json(j[i], "conditions[" + std::to_string(i) + "]"));
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
            if (rows[k].name == rows.back().name) {
                jsonutil::fail("conditions[" + std::to_string(i) + "].name", "duplicate row '" + rows.back().name + "'");
            }
        }
    }
    return rows;
}

std::vector<ConditionRow> load_condition_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open condition table " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_condition_table(ss.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

std::vector<ConditionRow> default_condition_table() { return parse_condition_table(embedded::conditions_default); }

std::string format_condition_table(const std::vector<ConditionRow>& rows) {
    auto j = jsonutil::json::array();
    for (const auto& r : rows) j.push_back(jsonutil::to_json(r));
    return j.dump(2) + "\n";
}

const ConditionRow& find_row(const std::vector<ConditionRow>& rows, std::string_view name) {
    for (const auto& r : rows) {
        if (r.name == name) return r;
    }
    throw Error(ErrorKind::Config, "no condition row named '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

std::int64_t SearchDomain::total_seconds() const {
    std::int64_t total = 0;
    for (const auto& p : pieces) total += p.length();
    return total;
}

bool SearchDomain::covers(std::int64_t lo, std::int64_t hi) const {
    // Pieces are sorted and disjoint; find the last piece starting at or before lo.
    auto it = std::upper_bound(pieces.begin(), pieces.end(), lo,
                               [](std::int64_t v, const Interval& p) { return v < p.start; });
    if (it == pieces.begin()) return false;
    --it;
    return lo >= it->start && hi <= it->end;
}

SearchDomain splice_data_pieces(const MeterRecording& rec, const ConditionRow& row) {
    std::vector<Interval> raw;
    const auto& epoch = rec.epoch();
    for (std::int64_t day = epoch.day_start(rec.start()); day < rec.end(); day += 86400) {
        const unsigned wd = epoch.weekday(day);
        for (const auto& w : row.windows) {
            if (!w.applies_on(wd)) continue;
            const Interval iv{std::max(day + w.start_s, rec.start()), std::min(day + w.end_s, rec.end())};
            if (iv.length() > 0) raw.push_back(iv);
        }
    }
    std::sort(raw.begin(), raw.end(), [](const Interval& x, const Interval& y) { return x.start < y.start; });

    std::vector<Interval> merged;
    for (const auto& iv : raw) {
        if (!merged.empty() && iv.start <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, iv.end);
        } else {
            merged.push_back(iv);
        }
    }

    SearchDomain domain;
    const auto& gaps = rec.gaps();
    std::size_t g = 0;
    for (auto piece : merged) {
        while (g < gaps.size() && gaps[g].end <= piece.start) ++g;
        for (std::size_t k = g; k < gaps.size() && gaps[k].start < piece.end; ++k) {
            if (gaps[k].start > piece.start) domain.pieces.push_back({piece.start, gaps[k].start});
            piece.start = std::max(piece.start, gaps[k].end);
        }
        if (piece.length() > 0) domain.pieces.push_back(piece);
    }
    if (domain.pieces.empty()) {
        throw Error(ErrorKind::Insufficient, "empty search domain for '" + row.name + "'");
    }
    return domain;
}

bool matches_conditions(const LoadEvent& e, const ConditionRow& row) {
    if (e.direction != Direction::On) return false;
    if (!row.p_w.contains(e.delta_p)) return false;
    if (!row.q_var.contains(std::abs(e.delta_q))) return false;
    if (e.thd) {
        if (!row.thd_pct.contains(*e.thd * 100.0)) return false;
    } else if (row.thd_pct.lo > 0.0) {
        return false;
    }
    if (row.spike == SpikeRequirement::Yes && !e.spike) return false;
    if (row.spike == SpikeRequirement::No && e.spike) return false;
    const bool is_double = e.phase == PhaseTag::AB;
    return is_double == (row.phase == PhaseCondition::Double);
}

SuspectSet filter_suspects(const std::vector<LoadEvent>& events, const ConditionRow& row, const SearchDomain& domain,
                           BoundaryGuard guard) {
    SuspectSet out;
    out.appliance = row.name;
    out.source_pieces = domain.pieces;
    for (const auto& e : events) {
        if (!domain.covers(e.t - guard.before_s, e.t + guard.after_s)) continue;
        if (matches_conditions(e, row)) out.events.push_back(e);
    }
    return out;
}

}  // namespace loadsig
