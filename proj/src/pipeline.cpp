#include "loadsig/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "jsonutil.hpp"
#include "loadsig/error.hpp"

namespace loadsig {

namespace {

using jsonutil::json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& path) {
    if (!obj.is_object()) jsonutil::fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) jsonutil::fail(path + "." + key, "unknown field");
    }
}

int int_field(const json& obj, std::string_view key, const std::string& path, int current) {
    if (!jsonutil::has(obj, key)) return current;
    return static_cast<int>(jsonutil::integer(obj[std::string(key)], path + "." + std::string(key)));
}

double num_field(const json& obj, std::string_view key, const std::string& path, double current) {
    if (!jsonutil::has(obj, key)) return current;
    return jsonutil::number(obj[std::string(key)], path + "." + std::string(key));
}

}  // namespace

ClusterParams default_pipeline_cluster_params() {
    ClusterParams c;
    c.similarity_floor = {0.0, 25.0, 0.01};
    return c;
}

void PipelineParams::validate() const {
    detect.validate();
    cluster.validate();
    association.validate();
    if (guard.before_s < 0 || guard.after_s < 0) throw Error(ErrorKind::Config, "guard seconds must be non-negative");
    if (min_authentic < 1) throw Error(ErrorKind::Config, "min_authentic must be at least 1");
}

PipelineParams parse_pipeline_params(std::string_view json_text) {
    const auto j = jsonutil::parse(json_text, "params");
    const std::string root = "params";
    reject_unknown(j, {"detect", "cluster", "association", "guard", "min_suspects", "min_authentic"}, root);
    PipelineParams p;
    if (jsonutil::has(j, "detect")) {
        const auto& d = j["detect"];
        const auto path = root + ".detect";
        reject_unknown(d,
                       {"min_edge_W", "settle_window_s", "pre_window_s", "spike_ratio", "phase_pair_tolerance_s",
                        "trigger_fraction", "thd_mode", "collision_window_s"},
                       path);
        p.detect.min_edge_w = num_field(d, "min_edge_W", path, p.detect.min_edge_w);
        p.detect.settle_window_s = int_field(d, "settle_window_s", path, p.detect.settle_window_s);
        p.detect.pre_window_s = int_field(d, "pre_window_s", path, p.detect.pre_window_s);
        p.detect.spike_ratio = num_field(d, "spike_ratio", path, p.detect.spike_ratio);
        p.detect.phase_pair_tolerance_s = int_field(d, "phase_pair_tolerance_s", path, p.detect.phase_pair_tolerance_s);
        p.detect.trigger_fraction = num_field(d, "trigger_fraction", path, p.detect.trigger_fraction);
        p.detect.collision_window_s = int_field(d, "collision_window_s", path, p.detect.collision_window_s);
        if (jsonutil::has(d, "thd_mode")) {
            const auto m = jsonutil::string(d["thd_mode"], path + ".thd_mode");
            if (m == "differential") p.detect.thd_mode = ThdMode::Differential;
            else if (m == "aggregate") p.detect.thd_mode = ThdMode::Aggregate;
            else jsonutil::fail(path + ".thd_mode", "expected differential or aggregate");
        }
    }
    if (jsonutil::has(j, "cluster")) {
        const auto& c = j["cluster"];
        const auto path = root + ".cluster";
        reject_unknown(c,
                       {"method", "bandwidth", "similarity_threshold", "similarity_floor", "max_iter",
                        "convergence_eps", "allow_any_bandwidth"},
                       path);
        if (jsonutil::has(c, "method")) {
            try {
                p.cluster.method = parse_cluster_method(jsonutil::string(c["method"], path + ".method"));
            } catch (const Error& e) {
                jsonutil::fail(path + ".method", e.what());
            }
        }
        p.cluster.bandwidth = num_field(c, "bandwidth", path, p.cluster.bandwidth);
        p.cluster.similarity_threshold = num_field(c, "similarity_threshold", path, p.cluster.similarity_threshold);
        if (jsonutil::has(c, "similarity_floor")) {
            const auto& f = c["similarity_floor"];
            const auto fp = path + ".similarity_floor";
            if (!f.is_array() || f.size() != 3) jsonutil::fail(fp, "expected [P_W, Q_var, THD_pct]");
            p.cluster.similarity_floor = {jsonutil::non_negative(f[0], fp + "[0]"), jsonutil::non_negative(f[1], fp + "[1]"),
                                          jsonutil::non_negative(f[2], fp + "[2]") / 100.0};
        }
        p.cluster.max_iter = int_field(c, "max_iter", path, p.cluster.max_iter);
        p.cluster.convergence_eps = num_field(c, "convergence_eps", path, p.cluster.convergence_eps);
        if (jsonutil::has(c, "allow_any_bandwidth")) {
            p.cluster.allow_any_bandwidth = jsonutil::boolean(c["allow_any_bandwidth"], path + ".allow_any_bandwidth");
        }
    }
    if (jsonutil::has(j, "association")) {
        const auto& a = j["association"];
        const auto path = root + ".association";
        reject_unknown(a, {"b", "c", "prefilter_power_band"}, path);
        p.association.b = num_field(a, "b", path, p.association.b);
        p.association.c = num_field(a, "c", path, p.association.c);
        p.association.prefilter_power_band = num_field(a, "prefilter_power_band", path, p.association.prefilter_power_band);
    }
    if (jsonutil::has(j, "guard")) {
        const auto& g = j["guard"];
        const auto path = root + ".guard";
        reject_unknown(g, {"before_s", "after_s"}, path);
        p.guard.before_s = int_field(g, "before_s", path, p.guard.before_s);
        p.guard.after_s = int_field(g, "after_s", path, p.guard.after_s);
    }
    if (jsonutil::has(j, "min_suspects")) {
        const auto v = jsonutil::integer(j["min_suspects"], root + ".min_suspects");
        if (v < 0) jsonutil::fail(root + ".min_suspects", "must be non-negative");
        p.min_suspects = static_cast<std::size_t>(v);
    }
    if (jsonutil::has(j, "min_authentic")) {
        const auto v = jsonutil::integer(j["min_authentic"], root + ".min_authentic");
        if (v < 1) jsonutil::fail(root + ".min_authentic", "must be at least 1");
        p.min_authentic = static_cast<std::size_t>(v);
    }
    p.validate();
    return p;
}

PipelineParams load_pipeline_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open params file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pipeline_params(ss.str());
}

std::string format_pipeline_params(const PipelineParams& p) {
    json j;
    j["detect"] = {{"min_edge_W", p.detect.min_edge_w},
                   {"settle_window_s", p.detect.settle_window_s},
                   {"pre_window_s", p.detect.pre_window_s},
                   {"spike_ratio", p.detect.spike_ratio},
                   {"phase_pair_tolerance_s", p.detect.phase_pair_tolerance_s},
                   {"trigger_fraction", p.detect.trigger_fraction},
                   {"thd_mode", p.detect.thd_mode == ThdMode::Differential ? "differential" : "aggregate"},
                   {"collision_window_s", p.detect.collision_window_s}};
    j["cluster"] = {{"method", std::string(to_string(p.cluster.method))},
                    {"bandwidth", p.cluster.bandwidth},
                    {"similarity_threshold", p.cluster.similarity_threshold},
                    {"similarity_floor",
                     {p.cluster.similarity_floor[0], p.cluster.similarity_floor[1], p.cluster.similarity_floor[2] * 100.0}},
                    {"max_iter", p.cluster.max_iter},
                    {"convergence_eps", p.cluster.convergence_eps},
                    {"allow_any_bandwidth", p.cluster.allow_any_bandwidth}};
    j["association"] = {{"b", p.association.b},
                        {"c", p.association.c},
                        {"prefilter_power_band", p.association.prefilter_power_band}};
    j["guard"] = {{"before_s", p.guard.before_s}, {"after_s", p.guard.after_s}};
    j["min_suspects"] = p.min_suspects;
    j["min_authentic"] = p.min_authentic;
    return j.dump(2);
}

std::size_t ApplianceResult::largest_cluster() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n = std::max(n, c.size());
    return n;
}

double ApplianceResult::largest_share() const {
    if (suspects.empty()) return 0.0;
    return static_cast<double>(largest_cluster()) / static_cast<double>(suspects.size());
}

ApplianceResult run_appliance(const MeterRecording& rec, const std::vector<LoadEvent>& events,
                              const ConditionRow& row, const PipelineParams& params) {
    ApplianceResult r;
    r.row = row;
    try {
        r.domain = splice_data_pieces(rec, row);
        r.suspects = filter_suspects(events, row, r.domain, params.guard).events;
        if (r.suspects.size() < params.min_suspects) {
            throw Error(ErrorKind::Insufficient, "too few suspect events (" + std::to_string(r.suspects.size()) + " < " +
                                                     std::to_string(params.min_suspects) + ")");
        }
        r.clusters = cluster_events(r.suspects, row.weights, params.cluster);
        r.authentic = select_dominant(r.clusters, params.min_authentic);
        const auto segments = build_segments(r.authentic, events, row, params.association);
        r.classes = associate_segments(segments, row.weights, params.cluster, params.association);
        r.cycle = assemble_cycle(row.name, r.classes, segments.size());
        r.found = true;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Insufficient && e.kind() != ErrorKind::Convergence) throw;
        r.found = false;
        r.reason = e.what();
    }
    return r;
}

ExtractionResult extract(const MeterRecording& rec, const std::vector<ConditionRow>& table,
                         const PipelineParams& params) {
    params.validate();
    ExtractionResult out;
    out.epoch = rec.epoch();
    out.start = rec.start();
    out.duration = rec.duration();
    out.params = params;
    const auto events = detect_events(rec, params.detect);
    out.event_count = events.size();
    for (const auto& row : table) out.appliances.push_back(run_appliance(rec, events, row, params));
    return out;
}

std::string format_windows(const std::vector<SearchWindow>& windows) {
    std::string s;
    for (const auto& w : windows) {
        if (!s.empty()) s += ", ";
        s += jsonutil::format_clock(w.start_s) + "-" + jsonutil::format_clock(w.end_s);
        if (w.days != DaySet::All) s += " " + std::string(to_string(w.days));
    }
    return s;
}

std::string format_extraction_summary(const ExtractionResult& result) {
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-14s %-34s %9s %9s %8s %7s  %s\n", "Appliance", "Search window", "Suspects",
                  "Clusters", "Largest", "Share", "Cycle");
    out += buf;
    for (const auto& a : result.appliances) {
        char share[16] = "-";
        if (!a.suspects.empty()) std::snprintf(share, sizeof share, "%.1f%%", 100.0 * a.largest_share());
        std::snprintf(buf, sizeof buf, "%-14s %-34s %9zu %9zu %8zu %7s  %s\n", a.row.name.c_str(),
                      format_windows(a.row.windows).c_str(), a.suspects.size(), a.clusters.size(), a.largest_cluster(),
                      share, a.found ? a.cycle.pattern().c_str() : ("not found: " + a.reason).c_str());
        out += buf;
    }
    return out;
}

}  // namespace loadsig
