#include "loadsig/association.hpp"

#include <algorithm>
#include <cmath>

#include "loadsig/error.hpp"

namespace loadsig {

void AssociationParams::validate() const {
    if (!(b > 0.0 && b < c && c <= 1.0)) throw Error(ErrorKind::Config, "association thresholds need 0 < b < c <= 1");
    if (!(segment_factor > 0.0)) throw Error(ErrorKind::Config, "segment_factor must be positive");
    if (!(prefilter_power_band > 0.0)) throw Error(ErrorKind::Config, "prefilter_power_band must be positive");
}

std::string_view to_string(AssociationType t) {
    switch (t) {
        case AssociationType::Single: return "single";
        case AssociationType::Repetitive: return "repetitive";
        case AssociationType::Occasional: return "occasional";
        case AssociationType::Unrelated: return "unrelated";
    }
    return "?";
}

AssociationType parse_association_type(std::string_view s) {
    for (auto t : {AssociationType::Single, AssociationType::Repetitive, AssociationType::Occasional,
                   AssociationType::Unrelated}) {
        if (s == to_string(t)) return t;
    }
    throw Error(ErrorKind::Data, "unknown association type '" + std::string(s) + "'");
}

double segment_length_s(const ConditionRow& row, const AssociationParams& params) {
    return params.segment_factor * row.avg_duration_min * 60.0;
}

std::vector<DataSegment> build_segments(const EventCluster& authentic, const std::vector<LoadEvent>& all_events,
                                        const ConditionRow& row, const AssociationParams& params) {
    params.validate();
    const auto length = static_cast<std::int64_t>(std::ceil(segment_length_s(row, params)));
    const double limit = params.prefilter_power_band * std::abs(authentic.mean_p);

    std::vector<DataSegment> out;
    for (const auto& anchor : authentic.members) {
        if (anchor.direction != Direction::On) continue;
        DataSegment seg;
        seg.anchor = anchor;
        seg.span = {anchor.t, anchor.t + length};
        auto it = std::lower_bound(all_events.begin(), all_events.end(), anchor.t,
                                   [](const LoadEvent& e, std::int64_t t) { return e.t < t; });
        for (; it != all_events.end() && it->t < seg.span.end; ++it) {
            if (it->phase != anchor.phase) continue;
            if (std::abs(it->delta_p) > limit) continue;
            seg.events.push_back(*it);
        }
        out.push_back(std::move(seg));
    }
    return out;
}

AssociationType classify_association(std::size_t n_total, std::size_t n_max, std::size_t m,
                                     const AssociationParams& params) {
    const double n = static_cast<double>(n_total);
    const double md = static_cast<double>(m);
    if (n >= params.c * md) return n_max >= 2 ? AssociationType::Repetitive : AssociationType::Single;
    if (n >= params.b * md) return AssociationType::Occasional;
    return AssociationType::Unrelated;
}

namespace {

struct Pooled {
    LoadEvent event;
    std::size_t segment = 0;
    bool anchor = false;
};

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<AssociatedEventClass> associate_segments(const std::vector<DataSegment>& segments, const Weights& weights,
                                                     const ClusterParams& cluster_params,
                                                     const AssociationParams& params) {
    params.validate();
    const std::size_t m = segments.size();
    std::vector<Pooled> pooled;
    for (std::size_t s = 0; s < m; ++s) {
        bool anchor_seen = false;
        for (const auto& e : segments[s].events) {
            const bool is_anchor = !anchor_seen && e == segments[s].anchor;
            anchor_seen = anchor_seen || is_anchor;
            pooled.push_back({e, s, is_anchor});
        }
    }

    std::vector<AssociatedEventClass> out;
    for (auto dir : {Direction::On, Direction::Off}) {
        std::vector<std::size_t> idx;
        std::vector<LoadEvent> events;
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            if (pooled[i].event.direction != dir) continue;
            idx.push_back(i);
            events.push_back(pooled[i].event);
        }
        for (const auto& group : cluster_groups(events, weights, cluster_params)) {
            AssociatedEventClass cls;
            cls.direction = dir;
            cls.per_segment.assign(m, 0);
            std::vector<std::pair<std::int64_t, std::size_t>> by_time;  // (t, pooled index)
            for (auto g : group) by_time.emplace_back(events[g].t, idx[g]);
            std::stable_sort(by_time.begin(), by_time.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });

            std::vector<LoadEvent> members;
            std::vector<double> first_offset(m, std::nan(""));
            for (const auto& [t, pi] : by_time) {
                const auto& p = pooled[pi];
                members.push_back(p.event);
                cls.member_segment.push_back(p.segment);
                ++cls.per_segment[p.segment];
                if (p.anchor) ++cls.anchors;
                const double off = static_cast<double>(p.event.t - segments[p.segment].anchor.t);
                if (std::isnan(first_offset[p.segment]) || off < first_offset[p.segment]) first_offset[p.segment] = off;
            }
            cls.cluster = make_cluster(std::move(members));
            cls.n_total = cls.cluster.size();
            cls.n_max = *std::max_element(cls.per_segment.begin(), cls.per_segment.end());
            cls.type = classify_association(cls.n_total, cls.n_max, m, params);
            std::vector<double> offsets;
            for (double o : first_offset) {
                if (!std::isnan(o)) offsets.push_back(o);
            }
            cls.median_offset_s = median(std::move(offsets));
            out.push_back(std::move(cls));
        }
    }
    return out;
}

CycleSignature assemble_cycle(const std::string& appliance, const std::vector<AssociatedEventClass>& classes,
                              std::size_t segments_used) {
    std::size_t anchor = classes.size();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i].anchors > 0 && (anchor == classes.size() || classes[i].anchors > classes[anchor].anchors)) {
            anchor = i;
        }
    }
    if (anchor == classes.size()) throw Error(ErrorKind::Insufficient, "no event class holds a segment anchor");

    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (i != anchor && classes[i].type != AssociationType::Unrelated) rest.push_back(i);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
        return classes[a].median_offset_s < classes[b].median_offset_s;
    });
    rest.insert(rest.begin(), anchor);

    CycleSignature sig;
    sig.appliance = appliance;
    sig.segments_used = segments_used;
    std::size_t single_off = 0;
    bool has_off = false;
    for (auto i : rest) {
        const auto& c = classes[i];
        sig.steps.push_back({i, c.direction, c.type, c.cluster.mean_p, c.cluster.mean_q, c.cluster.mean_thd,
                             c.median_offset_s, c.n_total, c.n_max});
        if (c.direction == Direction::Off &&
            (c.type == AssociationType::Single || c.type == AssociationType::Repetitive)) {
            has_off = true;
            if (c.type == AssociationType::Single) ++single_off;
        }
    }
    sig.open_cycle = !has_off;
    sig.multiple_off = single_off > 1;
    if (sig.open_cycle) sig.warnings.emplace_back("open cycle: no recurring OFF event class");
    if (sig.multiple_off) sig.warnings.emplace_back("more than one single OFF event class");
    return sig;
}

std::string CycleSignature::pattern() const {
    std::string out;
    bool in_bracket = false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const bool occ = steps[i].type == AssociationType::Occasional;
        if (i > 0) out += occ && in_bracket ? " -> " : (in_bracket ? ") -> " : " -> ");
        if (i > 0 && in_bracket && !occ) in_bracket = false;
        if (occ && !in_bracket) {
            out += '(';
            in_bracket = true;
        }
        out += std::to_string(i + 1);
        if (steps[i].type == AssociationType::Repetitive) out += '*';
    }
    if (in_bracket) out += ')';
    return out;
}

}  // namespace loadsig
