#include "loadsig/sigdb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "jsonutil.hpp"
#include "loadsig/error.hpp"

namespace loadsig {

namespace {

using jsonutil::json;

using Triple = std::array<double, 3>;  // dP, dQ, THD fraction

ClassMeans means_of(const std::vector<Triple>& rows) {
    ClassMeans m;
    if (rows.empty()) return m;
    for (const auto& r : rows) {
        m.p += r[0];
        m.q += r[1];
        m.thd += r[2];
    }
    const double n = static_cast<double>(rows.size());
    m.p /= n;
    m.q /= n;
    m.thd /= n;
    return m;
}

Triple triple_of(const EventRecord& e) { return {e.dp, e.dq, e.thd_pct ? *e.thd_pct / 100.0 : 0.0}; }
Triple triple_of(const TruthEvent& e) { return {e.delta_p, e.delta_q, e.thd ? *e.thd : 0.0}; }

json event_json(const EventRecord& e) {
    json j;
    j["t_s"] = e.t;
    j["phase"] = std::string(to_string(e.phase));
    j["direction"] = std::string(to_string(e.direction));
    j["dP_W"] = e.dp;
    j["dQ_var"] = e.dq;
    j["THD_pct"] = e.thd_pct ? json(*e.thd_pct) : json(nullptr);
    j["spike"] = e.spike;
    j["corrupted"] = e.corrupted;
    return j;
}

// Data errors: a malformed database is unusable input rather than bad config.
template <typename F>
auto as_data(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(ErrorKind::Data, std::string("signature database: ") + e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Data, std::string("signature database: ") + e.what());
    }
}

EventRecord event_from_json(const json& j, const std::string& path) {
    EventRecord e;
    e.t = jsonutil::integer(jsonutil::require(j, "t_s", path), path + ".t_s");
    e.phase = parse_phase_tag(jsonutil::string(jsonutil::require(j, "phase", path), path + ".phase"));
    e.direction = parse_direction(jsonutil::string(jsonutil::require(j, "direction", path), path + ".direction"));
    e.dp = jsonutil::number(jsonutil::require(j, "dP_W", path), path + ".dP_W");
    e.dq = jsonutil::number(jsonutil::require(j, "dQ_var", path), path + ".dQ_var");
    const auto& thd = jsonutil::require(j, "THD_pct", path);
    if (!thd.is_null()) e.thd_pct = jsonutil::number(thd, path + ".THD_pct");
    e.spike = jsonutil::boolean(jsonutil::require(j, "spike", path), path + ".spike");
    e.corrupted = jsonutil::boolean(jsonutil::require(j, "corrupted", path), path + ".corrupted");
    return e;
}

std::vector<EventRecord> events_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) jsonutil::fail(path, "expected an array");
    std::vector<EventRecord> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(event_from_json(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::size_t size_field(const json& obj, std::string_view key, const std::string& path) {
    const auto v = jsonutil::integer(jsonutil::require(obj, key, path), path + "." + std::string(key));
    if (v < 0) jsonutil::fail(path + "." + std::string(key), "must be non-negative");
    return static_cast<std::size_t>(v);
}

std::optional<double> percent_error(double extracted, double truth) {
    if (truth == 0.0) return std::nullopt;
    return 100.0 * (extracted - truth) / truth;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_text(const std::optional<double>& v, const char* fmt) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return buf;
}

}  // namespace

EventRecord to_record(const LoadEvent& e) {
    EventRecord r;
    r.t = e.t;
    r.phase = e.phase;
    r.direction = e.direction;
    r.dp = e.delta_p;
    r.dq = e.delta_q;
    if (e.thd) r.thd_pct = *e.thd * 100.0;
    r.spike = e.spike;
    r.corrupted = e.corrupted;
    return r;
}

ClassMeans class_means(const std::vector<EventRecord>& members) {
    std::vector<Triple> rows;
    rows.reserve(members.size());
    for (const auto& m : members) rows.push_back(triple_of(m));
    return means_of(rows);
}

const ApplianceRecord* SignatureDatabase::find(std::string_view name) const {
    for (const auto& a : appliances) {
        if (a.row.name == name) return &a;
    }
    return nullptr;
}

bool SignatureDatabase::operator==(const SignatureDatabase& o) const {
    return version == o.version && epoch == o.epoch && start == o.start && duration == o.duration &&
           events_detected == o.events_detected && format_pipeline_params(params) == format_pipeline_params(o.params) &&
           appliances == o.appliances;
}

SignatureDatabase make_database(const ExtractionResult& result) {
    SignatureDatabase db;
    db.epoch = result.epoch;
    db.start = result.start;
    db.duration = result.duration;
    db.events_detected = result.event_count;
    db.params = result.params;
    for (const auto& a : result.appliances) {
        ApplianceRecord r;
        r.row = a.row;
        r.found = a.found;
        r.reason = a.reason;
        r.domain = a.domain.pieces;
        r.suspects = a.suspects.size();
        r.clusters = a.clusters.size();
        r.largest = a.largest_cluster();
        for (const auto& e : a.authentic.members) r.authentic.push_back(to_record(e));
        if (a.found) {
            r.segments_used = a.cycle.segments_used;
            for (std::size_t i = 0; i < a.classes.size(); ++i) {
                const auto& c = a.classes[i];
                ClassRecord cr;
                cr.id = i;
                cr.direction = c.direction;
                cr.type = c.type;
                cr.n_total = c.n_total;
                cr.n_max = c.n_max;
                cr.median_offset_s = c.median_offset_s;
                cr.per_segment = c.per_segment;
                for (const auto& e : c.cluster.members) cr.members.push_back(to_record(e));
                cr.means = class_means(cr.members);
                r.classes.push_back(std::move(cr));
            }
            for (const auto& s : a.cycle.steps) r.steps.push_back(s.class_index);
            r.pattern = a.cycle.pattern();
            r.open_cycle = a.cycle.open_cycle;
            r.multiple_off = a.cycle.multiple_off;
            r.warnings = a.cycle.warnings;
        }
        db.appliances.push_back(std::move(r));
    }
    return db;
}

std::string format_database(const SignatureDatabase& db) {
    json j;
    j["format"] = "loadsig-signature-db";
    j["version"] = db.version;
    j["recording"] = {{"epoch", db.epoch.to_string()},
                      {"epoch_explicit", db.epoch.explicit_value},
                      {"start_s", db.start},
                      {"duration_s", db.duration},
                      {"events_detected", db.events_detected}};
    j["params"] = json::parse(format_pipeline_params(db.params));
    j["appliances"] = json::array();
    for (const auto& a : db.appliances) {
        json ja;
        ja["name"] = a.row.name;
        ja["found"] = a.found;
        ja["reason"] = a.reason;
        ja["condition"] = jsonutil::to_json(a.row);
        ja["search_domain"] = json::array();
        for (const auto& p : a.domain) ja["search_domain"].push_back({p.start, p.end});
        ja["suspects"] = a.suspects;
        ja["clusters"] = a.clusters;
        ja["largest_cluster"] = a.largest;
        ja["authentic_events"] = json::array();
        for (const auto& e : a.authentic) ja["authentic_events"].push_back(event_json(e));
        ja["segments_used"] = a.segments_used;
        ja["classes"] = json::array();
        for (const auto& c : a.classes) {
            json jc;
            jc["id"] = c.id;
            jc["direction"] = std::string(to_string(c.direction));
            jc["type"] = std::string(to_string(c.type));
            jc["N"] = c.n_total;
            jc["n_max"] = c.n_max;
            jc["median_offset_s"] = c.median_offset_s;
            jc["mean_P_W"] = c.means.p;
            jc["mean_Q_var"] = c.means.q;
            jc["mean_THD_pct"] = c.means.thd * 100.0;
            jc["per_segment"] = c.per_segment;
            jc["members"] = json::array();
            for (const auto& e : c.members) jc["members"].push_back(event_json(e));
            ja["classes"].push_back(std::move(jc));
        }
        ja["cycle"] = {{"pattern", a.pattern},
                       {"steps", a.steps},
                       {"open_cycle", a.open_cycle},
                       {"multiple_off", a.multiple_off},
                       {"warnings", a.warnings}};
        j["appliances"].push_back(std::move(ja));
    }
    return j.dump(1) + "\n";
}

SignatureDatabase parse_database(std::string_view json_text) {
    return as_data([&] {
        const auto j = jsonutil::parse(json_text, "signature database");
        const std::string root = "db";
        SignatureDatabase db;
        if (jsonutil::string(jsonutil::require(j, "format", root), root + ".format") != "loadsig-signature-db") {
            jsonutil::fail(root + ".format", "not a signature database");
        }
        db.version = static_cast<int>(jsonutil::integer(jsonutil::require(j, "version", root), root + ".version"));
        if (db.version != kSignatureDbVersion) {
            jsonutil::fail(root + ".version", "unsupported version " + std::to_string(db.version));
        }
        const auto rp = root + ".recording";
        const auto& rec = jsonutil::require(j, "recording", root);
        db.epoch = Epoch::parse(jsonutil::string(jsonutil::require(rec, "epoch", rp), rp + ".epoch"));
        db.epoch.explicit_value = jsonutil::boolean(jsonutil::require(rec, "epoch_explicit", rp), rp + ".epoch_explicit");
        db.start = jsonutil::integer(jsonutil::require(rec, "start_s", rp), rp + ".start_s");
        db.duration = jsonutil::integer(jsonutil::require(rec, "duration_s", rp), rp + ".duration_s");
        db.events_detected = size_field(rec, "events_detected", rp);
        db.params = parse_pipeline_params(jsonutil::require(j, "params", root).dump());

        const auto& apps = jsonutil::require(j, "appliances", root);
        if (!apps.is_array()) jsonutil::fail(root + ".appliances", "expected an array");
        for (std::size_t i = 0; i < apps.size(); ++i) {
            const auto ap = root + ".appliances[" + std::to_string(i) + "]";
            const auto& ja = apps[i];
            ApplianceRecord a;
            a.row = jsonutil::condition_row_from_json(jsonutil::require(ja, "condition", ap), ap + ".condition");
            a.found = jsonutil::boolean(jsonutil::require(ja, "found", ap), ap + ".found");
            a.reason = jsonutil::string(jsonutil::require(ja, "reason", ap), ap + ".reason");
            const auto& dom = jsonutil::require(ja, "search_domain", ap);
            if (!dom.is_array()) jsonutil::fail(ap + ".search_domain", "expected an array");
            for (std::size_t k = 0; k < dom.size(); ++k) {
                const auto dp = ap + ".search_domain[" + std::to_string(k) + "]";
                if (!dom[k].is_array() || dom[k].size() != 2) jsonutil::fail(dp, "expected [start, end]");
                a.domain.push_back({jsonutil::integer(dom[k][0], dp), jsonutil::integer(dom[k][1], dp)});
            }
            a.suspects = size_field(ja, "suspects", ap);
            a.clusters = size_field(ja, "clusters", ap);
            a.largest = size_field(ja, "largest_cluster", ap);
            a.authentic = events_from_json(jsonutil::require(ja, "authentic_events", ap), ap + ".authentic_events");
            a.segments_used = size_field(ja, "segments_used", ap);
            const auto& classes = jsonutil::require(ja, "classes", ap);
            if (!classes.is_array()) jsonutil::fail(ap + ".classes", "expected an array");
            for (std::size_t k = 0; k < classes.size(); ++k) {
                const auto cp = ap + ".classes[" + std::to_string(k) + "]";
                const auto& jc = classes[k];
                ClassRecord c;
                c.id = size_field(jc, "id", cp);
                c.direction = parse_direction(jsonutil::string(jsonutil::require(jc, "direction", cp), cp + ".direction"));
                c.type = parse_association_type(jsonutil::string(jsonutil::require(jc, "type", cp), cp + ".type"));
                c.n_total = size_field(jc, "N", cp);
                c.n_max = size_field(jc, "n_max", cp);
                c.median_offset_s = jsonutil::number(jsonutil::require(jc, "median_offset_s", cp), cp + ".median_offset_s");
                const auto& ps = jsonutil::require(jc, "per_segment", cp);
                if (!ps.is_array()) jsonutil::fail(cp + ".per_segment", "expected an array");
                for (std::size_t s = 0; s < ps.size(); ++s) {
                    const auto v = jsonutil::integer(ps[s], cp + ".per_segment");
                    if (v < 0) jsonutil::fail(cp + ".per_segment", "must be non-negative");
                    c.per_segment.push_back(static_cast<std::size_t>(v));
                }
                c.members = events_from_json(jsonutil::require(jc, "members", cp), cp + ".members");
                // Means are derived data; recomputing keeps them consistent with the members.
                c.means = class_means(c.members);
                a.classes.push_back(std::move(c));
            }
            const auto yp = ap + ".cycle";
            const auto& cyc = jsonutil::require(ja, "cycle", ap);
            a.pattern = jsonutil::string(jsonutil::require(cyc, "pattern", yp), yp + ".pattern");
            const auto& steps = jsonutil::require(cyc, "steps", yp);
            if (!steps.is_array()) jsonutil::fail(yp + ".steps", "expected an array");
            for (const auto& s : steps) {
                const auto v = jsonutil::integer(s, yp + ".steps");
                if (v < 0 || static_cast<std::size_t>(v) >= a.classes.size()) jsonutil::fail(yp + ".steps", "unknown class id");
                a.steps.push_back(static_cast<std::size_t>(v));
            }
            a.open_cycle = jsonutil::boolean(jsonutil::require(cyc, "open_cycle", yp), yp + ".open_cycle");
            a.multiple_off = jsonutil::boolean(jsonutil::require(cyc, "multiple_off", yp), yp + ".multiple_off");
            const auto& warns = jsonutil::require(cyc, "warnings", yp);
            if (!warns.is_array()) jsonutil::fail(yp + ".warnings", "expected an array");
            for (const auto& w : warns) a.warnings.push_back(jsonutil::string(w, yp + ".warnings"));
            db.appliances.push_back(std::move(a));
        }
        return db;
    });
}

void save_database(const SignatureDatabase& db, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << format_database(db);
    if (!out) throw Error(ErrorKind::Data, "write failed for " + path.string());
}

SignatureDatabase load_database(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_database(ss.str());
}

std::vector<TruthEvent> truth_from_database(const SignatureDatabase& db) {
    std::vector<TruthEvent> out;
    for (const auto& a : db.appliances) {
        if (!a.found) continue;
        for (auto id : a.steps) {
            const auto& c = a.classes[id];
            for (const auto& m : c.members) {
                TruthEvent e;
                e.t = m.t;
                e.appliance = a.row.name;
                e.phase = m.phase;
                e.direction = m.direction;
                e.delta_p = m.dp;
                e.delta_q = m.dq;
                if (m.thd_pct) e.thd = *m.thd_pct / 100.0;
                e.state = "class" + std::to_string(c.id);
                out.push_back(std::move(e));
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const TruthEvent& x, const TruthEvent& y) { return x.t < y.t; });
    return out;
}

std::string format_cycles_csv(const SignatureDatabase& db) {
    std::string out = "appliance,step,class,direction,type,offset_s,dP_W,dQ_var,THD_pct,level_W\n";
    for (const auto& a : db.appliances) {
        if (!a.found) continue;
        double level = 0.0;
        for (std::size_t s = 0; s < a.steps.size(); ++s) {
            const auto& c = a.classes[a.steps[s]];
            level += c.means.p;
            out += a.row.name + ',' + std::to_string(s + 1) + ',' + std::to_string(c.id) + ',' +
                   std::string(to_string(c.direction)) + ',' + std::string(to_string(c.type)) + ',' +
                   format_exact(c.median_offset_s) + ',' + format_exact(c.means.p) + ',' + format_exact(c.means.q) + ',' +
                   format_short(c.means.thd * 100.0) + ',' + format_exact(level) + '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

EvalReport evaluate(const SignatureDatabase& db, const std::vector<TruthEvent>& truth_in, EvalParams params) {
    auto truth = truth_in;
    std::stable_sort(truth.begin(), truth.end(), [](const TruthEvent& x, const TruthEvent& y) { return x.t < y.t; });

    std::vector<std::int64_t> all_times;
    for (const auto& e : truth) all_times.push_back(e.t);
    // Another truth event (any appliance) within the isolation window of index i.
    auto crowded = [&](std::size_t i) {
        const auto t = truth[i].t;
        const auto lo = std::lower_bound(all_times.begin(), all_times.end(), t - params.isolation_s);
        const auto hi = std::upper_bound(all_times.begin(), all_times.end(), t + params.isolation_s);
        return (hi - lo) > 1;
    };

    EvalReport report;
    std::set<std::string> in_db;
    for (const auto& a : db.appliances) {
        in_db.insert(a.row.name);
        ApplianceEval ae;
        ae.name = a.row.name;
        ae.found = a.found;

        std::vector<std::size_t> mine;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i].appliance == a.row.name) mine.push_back(i);
        }
        ae.truth_events = mine.size();
        if (a.found) {
            auto near_on_truth = [&](std::int64_t t) {
                for (auto i : mine) {
                    if (truth[i].direction == Direction::On && std::llabs(truth[i].t - t) <= params.match_tolerance_s) {
                        return true;
                    }
                }
                return false;
            };
            auto near_authentic = [&](std::int64_t t) {
                for (const auto& e : a.authentic) {
                    if (std::llabs(e.t - t) <= params.match_tolerance_s) return true;
                }
                return false;
            };
            ae.authentic = a.authentic.size();
            for (const auto& e : a.authentic) ae.authentic_matched += near_on_truth(e.t) ? 1 : 0;
            if (ae.authentic > 0 && !mine.empty()) {
                ae.precision = static_cast<double>(ae.authentic_matched) / static_cast<double>(ae.authentic);
            }

            SearchDomain domain{a.domain};
            const auto& guard = db.params.guard;
            for (auto i : mine) {
                const auto& e = truth[i];
                if (e.direction != Direction::On) continue;
                if (!domain.covers(e.t - guard.before_s, e.t + guard.after_s)) continue;
                if (!a.row.p_w.contains(std::abs(e.delta_p)) || !a.row.q_var.contains(std::abs(e.delta_q))) continue;
                if (e.thd ? !a.row.thd_pct.contains(*e.thd * 100.0) : a.row.thd_pct.lo > 0.0) continue;
                if (crowded(i)) continue;
                ++ae.recall_total;
                ae.recall_hit += near_authentic(e.t) ? 1 : 0;
            }
            if (ae.recall_total > 0) {
                ae.recall = static_cast<double>(ae.recall_hit) / static_cast<double>(ae.recall_total);
            }

            // Truth classes by (state, direction), in first-occurrence order.
            struct TruthClass {
                std::string state;
                Direction direction;
                std::vector<Triple> rows;
                ClassMeans means;
            };
            std::vector<TruthClass> tclasses;
            for (auto i : mine) {
                const auto& e = truth[i];
                auto it = std::find_if(tclasses.begin(), tclasses.end(), [&](const TruthClass& c) {
                    return c.state == e.state && c.direction == e.direction;
                });
                if (it == tclasses.end()) {
                    tclasses.push_back({e.state, e.direction, {}, {}});
                    it = tclasses.end() - 1;
                }
                it->rows.push_back(triple_of(e));
            }
            for (auto& c : tclasses) c.means = means_of(c.rows);

            for (auto id : a.steps) {
                const auto& c = a.classes[id];
                ClassEval ce;
                ce.class_id = c.id;
                ce.direction = c.direction;
                ce.type = c.type;
                ce.extracted = c.means;
                const TruthClass* best = nullptr;
                for (const auto& t : tclasses) {
                    if (t.direction != c.direction) continue;
                    if (!best || std::abs(t.means.p - c.means.p) < std::abs(best->means.p - c.means.p)) best = &t;
                }
                if (best) {
                    ce.matched = true;
                    ce.truth_state = best->state;
                    ce.truth_count = best->rows.size();
                    ce.truth = best->means;
                    ce.err_p = percent_error(c.means.p, best->means.p);
                    ce.err_q = percent_error(c.means.q, best->means.q);
                    ce.err_thd = percent_error(c.means.thd, best->means.thd);
                }
                ae.classes.push_back(std::move(ce));
            }
        }
        report.appliances.push_back(std::move(ae));
    }
    std::set<std::string> truth_only;
    for (const auto& e : truth) {
        if (!in_db.count(e.appliance)) truth_only.insert(e.appliance);
    }
    report.truth_only.assign(truth_only.begin(), truth_only.end());
    return report;
}

std::string format_eval_json(const EvalReport& report) {
    json j;
    j["appliances"] = json::array();
    for (const auto& a : report.appliances) {
        json ja;
        ja["name"] = a.name;
        ja["found"] = a.found;
        ja["truth_events"] = a.truth_events;
        ja["authentic"] = a.authentic;
        ja["authentic_matched"] = a.authentic_matched;
        ja["recall_total"] = a.recall_total;
        ja["recall_hit"] = a.recall_hit;
        ja["precision"] = optional_json(a.precision);
        ja["recall"] = optional_json(a.recall);
        ja["classes"] = json::array();
        for (const auto& c : a.classes) {
            json jc;
            jc["class"] = c.class_id;
            jc["direction"] = std::string(to_string(c.direction));
            jc["type"] = std::string(to_string(c.type));
            jc["mean_P_W"] = c.extracted.p;
            jc["mean_Q_var"] = c.extracted.q;
            jc["mean_THD_pct"] = c.extracted.thd * 100.0;
            jc["matched"] = c.matched;
            if (c.matched) {
                jc["truth_state"] = c.truth_state;
                jc["truth_count"] = c.truth_count;
                jc["truth_P_W"] = c.truth.p;
                jc["truth_Q_var"] = c.truth.q;
                jc["truth_THD_pct"] = c.truth.thd * 100.0;
            } else {
                jc["truth_state"] = "unmatched";
            }
            jc["err_P_pct"] = optional_json(c.err_p);
            jc["err_Q_pct"] = optional_json(c.err_q);
            jc["err_THD_pct"] = optional_json(c.err_thd);
            ja["classes"].push_back(std::move(jc));
        }
        j["appliances"].push_back(std::move(ja));
    }
    j["truth_only"] = report.truth_only;
    return j.dump(2) + "\n";
}

std::string format_eval_table(const EvalReport& report) {
    std::string out;
    char buf[256];
    for (const auto& a : report.appliances) {
        std::snprintf(buf, sizeof buf, "%s: %s, precision %s, recall %s (%zu/%zu)\n", a.name.c_str(),
                      a.found ? "found" : (a.truth_events ? "NOT FOUND" : "not found"),
                      optional_text(a.precision, "%.3f").c_str(), optional_text(a.recall, "%.3f").c_str(), a.recall_hit,
                      a.recall_total);
        out += buf;
        if (a.classes.empty()) continue;
        std::snprintf(buf, sizeof buf, "  %-5s %-4s %-11s %10s %9s %7s  %-18s %8s %8s %8s\n", "class", "dir", "type",
                      "P (W)", "Q (var)", "THD %", "truth", "P err %", "Q err %", "THD err %");
        out += buf;
        for (const auto& c : a.classes) {
            std::snprintf(buf, sizeof buf, "  %-5zu %-4s %-11s %10.2f %9.2f %7.2f  %-18s %8s %8s %8s\n", c.class_id,
                          std::string(to_string(c.direction)).c_str(), std::string(to_string(c.type)).c_str(),
                          c.extracted.p, c.extracted.q, c.extracted.thd * 100.0,
                          c.matched ? c.truth_state.c_str() : "unmatched", optional_text(c.err_p, "%+.2f").c_str(),
                          optional_text(c.err_q, "%+.2f").c_str(), optional_text(c.err_thd, "%+.2f").c_str());
            out += buf;
        }
    }
    for (const auto& name : report.truth_only) out += name + ": in truth log only\n";
    return out;
}

}  // namespace loadsig
