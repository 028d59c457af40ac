#include "loadsig/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loadsig {

std::string_view to_string(ClusterMethod m) { return m == ClusterMethod::MeanShift ? "mean_shift" : "weight_based"; }

ClusterMethod parse_cluster_method(std::string_view s) {
    if (s == "mean_shift") return ClusterMethod::MeanShift;
    if (s == "weight_based") return ClusterMethod::WeightBased;
    throw Error(ErrorKind::Config, "unknown clustering method '" + std::string(s) + "'");
}

void ClusterParams::validate() const {
    if (!(bandwidth > 0.0)) throw Error(ErrorKind::Config, "bandwidth must be positive");
    if (!allow_any_bandwidth && (bandwidth < 5.0 || bandwidth > 20.0)) {
        throw Error(ErrorKind::Config, "bandwidth must lie in [5, 20] unless explicitly overridden");
    }
    if (!(similarity_threshold > 0.0 && similarity_threshold < 1.0)) {
        throw Error(ErrorKind::Config, "similarity_threshold must lie in (0, 1)");
    }
    if (!(norm_lo < norm_hi)) throw Error(ErrorKind::Config, "norm_lo must be below norm_hi");
    if (max_iter < 1) throw Error(ErrorKind::Config, "max_iter must be positive");
    if (!(convergence_eps > 0.0)) throw Error(ErrorKind::Config, "convergence_eps must be positive");
    for (double f : similarity_floor) {
        if (!(f >= 0.0)) throw Error(ErrorKind::Config, "similarity_floor entries must be non-negative");
    }
}

FeatureVector event_features(const LoadEvent& e) {
    const double s = e.direction == Direction::On ? 1.0 : -1.0;
    return {e.delta_p * s, e.delta_q * s, e.thd.value_or(0.0)};
}

std::int64_t EventCluster::first_time() const {
    std::int64_t t = members.front().t;
    for (const auto& m : members) t = std::min(t, m.t);
    return t;
}

double EventCluster::total_abs_p() const {
    double s = 0.0;
    for (const auto& m : members) s += std::abs(m.delta_p);
    return s;
}

EventCluster make_cluster(std::vector<LoadEvent> members) {
    if (members.empty()) throw Error(ErrorKind::Domain, "cluster without members");
    std::stable_sort(members.begin(), members.end(), [](const LoadEvent& a, const LoadEvent& b) { return a.t < b.t; });
    EventCluster c;
    for (const auto& m : members) {
        c.mean_p += m.delta_p;
        c.mean_q += m.delta_q;
        c.mean_thd += m.thd.value_or(0.0);
    }
    const double n = static_cast<double>(members.size());
    c.mean_p /= n;
    c.mean_q /= n;
    c.mean_thd /= n;
    c.members = std::move(members);
    return c;
}

FeatureVector NormalizedFeatures::inverse(const FeatureVector& x) const {
    FeatureVector out{};
    for (std::size_t f = 0; f < 3; ++f) {
        const auto& s = scaling[f];
        out[f] = s.degenerate ? s.min : s.min + (x[f] - lo) * (s.max - s.min) / (hi - lo);
    }
    return out;
}

NormalizedFeatures normalize_features(const std::vector<LoadEvent>& events, double lo, double hi) {
    NormalizedFeatures nf;
    nf.lo = lo;
    nf.hi = hi;
    nf.rows.reserve(events.size());
    for (const auto& e : events) nf.rows.push_back(event_features(e));
    for (std::size_t f = 0; f < 3; ++f) {
        auto& s = nf.scaling[f];
        if (nf.rows.empty()) {
            s.degenerate = true;
            continue;
        }
        s.min = s.max = nf.rows.front()[f];
        for (const auto& r : nf.rows) {
            s.min = std::min(s.min, r[f]);
            s.max = std::max(s.max, r[f]);
        }
        s.degenerate = !(s.max > s.min);
        for (auto& r : nf.rows) {
            r[f] = s.degenerate ? 0.5 * (lo + hi) : lo + (r[f] - s.min) * (hi - lo) / (s.max - s.min);
        }
    }
    return nf;
}

namespace {

std::vector<std::size_t> time_order(const std::vector<LoadEvent>& events) {
    std::vector<std::size_t> idx(events.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return events[a].t < events[b].t; });
    return idx;
}

std::int64_t group_first_time(const std::vector<LoadEvent>& events, const std::vector<std::size_t>& g) {
    std::int64_t t = events[g.front()].t;
    for (auto i : g) t = std::min(t, events[i].t);
    return t;
}

// Drops empty groups and orders the rest by earliest member time.
std::vector<std::vector<std::size_t>> order_groups(const std::vector<LoadEvent>& events,
                                                   std::vector<std::vector<std::size_t>> groups) {
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    std::stable_sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
        return group_first_time(events, a) < group_first_time(events, b);
    });
    return groups;
}

std::vector<EventCluster> to_clusters(const std::vector<LoadEvent>& events,
                                      const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<EventCluster> out;
    for (const auto& g : order_groups(events, groups)) {
        std::vector<LoadEvent> members;
        members.reserve(g.size());
        for (auto i : g) members.push_back(events[i]);
        out.push_back(make_cluster(std::move(members)));
    }
    return out;
}

struct Metric {
    std::array<bool, 3> active{};

    double distance(const FeatureVector& x, const FeatureVector& y) const {
        double s = 0.0;
        for (std::size_t f = 0; f < 3; ++f) {
            if (active[f]) s += (x[f] - y[f]) * (x[f] - y[f]);
        }
        return std::sqrt(s);
    }
};

// Modes within h/2 of an existing representative join it; then every point
// goes to its nearest representative.
std::vector<std::vector<std::size_t>> assign_to_modes(const std::vector<FeatureVector>& points,
                                                      const std::vector<FeatureVector>& modes, const Metric& metric,
                                                      double bandwidth) {
    std::vector<FeatureVector> reps;
    for (const auto& m : modes) {
        bool joined = false;
        for (const auto& r : reps) {
            if (metric.distance(m, r) < 0.5 * bandwidth) {
                joined = true;
                break;
            }
        }
        if (!joined) reps.push_back(m);
    }
    std::vector<std::vector<std::size_t>> groups(reps.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = metric.distance(points[i], reps[0]);
        for (std::size_t k = 1; k < reps.size(); ++k) {
            const double d = metric.distance(points[i], reps[k]);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        groups[best].push_back(i);
    }
    return groups;
}

std::vector<std::vector<std::size_t>> mean_shift_groups(const std::vector<LoadEvent>& events, const ClusterParams& params) {
    params.validate();
    if (events.empty()) return {};
    const auto order = time_order(events);
    std::vector<LoadEvent> sorted;
    sorted.reserve(events.size());
    for (auto i : order) sorted.push_back(events[i]);

    const auto nf = normalize_features(sorted, params.norm_lo, params.norm_hi);
    Metric metric;
    for (std::size_t f = 0; f < 3; ++f) metric.active[f] = !nf.scaling[f].degenerate;

    const auto& pts = nf.rows;
    std::vector<FeatureVector> modes(pts.size());
    bool all_converged = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        FeatureVector x = pts[i];
        bool converged = false;
        for (int it = 0; it < params.max_iter; ++it) {
            FeatureVector sum{};
            std::size_t count = 0;
            for (const auto& p : pts) {
                if (metric.distance(p, x) <= params.bandwidth) {
                    for (std::size_t f = 0; f < 3; ++f) sum[f] += p[f];
                    ++count;
                }
            }
            if (count == 0) {
                converged = true;
                break;
            }
            FeatureVector next{};
            for (std::size_t f = 0; f < 3; ++f) next[f] = sum[f] / static_cast<double>(count);
            const double shift = metric.distance(next, x);
            x = next;
            if (shift < params.convergence_eps) {
                converged = true;
                break;
            }
        }
        modes[i] = x;
        all_converged = all_converged && converged;
    }
    auto groups = assign_to_modes(pts, modes, metric, params.bandwidth);
    for (auto& g : groups) {
        for (auto& i : g) i = order[i];
    }
    if (!all_converged) {
        throw ClusteringError("mean-shift did not converge within " + std::to_string(params.max_iter) + " iterations",
                              to_clusters(events, groups));
    }
    return order_groups(events, std::move(groups));
}

}  // namespace

std::vector<EventCluster> mean_shift_cluster(const std::vector<LoadEvent>& events, const ClusterParams& params) {
    return to_clusters(events, mean_shift_groups(events, params));
}

double sub_similarity(double e, double c, double floor) {
    const double denom = std::max(std::abs(c), floor);
    if (denom == 0.0) return e == 0.0 ? 1.0 : 0.0;
    const double rel = std::abs(e - c) / denom;
    return rel <= 1.0 ? 1.0 - rel : 0.0;
}

double similarity(const FeatureVector& e, const FeatureVector& c, const Weights& w, const FeatureVector& floor) {
    return w.p * sub_similarity(e[0], c[0], floor[0]) + w.q * sub_similarity(e[1], c[1], floor[1]) +
           w.h * sub_similarity(e[2], c[2], floor[2]);
}

namespace {

struct WorkCluster {
    std::vector<std::size_t> members;
    FeatureVector sum{};

    FeatureVector mean() const {
        const double n = static_cast<double>(members.size());
        return {sum[0] / n, sum[1] / n, sum[2] / n};
    }
    void absorb(const WorkCluster& o) {
        members.insert(members.end(), o.members.begin(), o.members.end());
        for (std::size_t f = 0; f < 3; ++f) sum[f] += o.sum[f];
    }
};

// Index of the most similar cluster with similarity >= threshold, or size().
std::size_t best_match(const FeatureVector& x, const std::vector<WorkCluster>& clusters, const Weights& w,
                       const ClusterParams& params) {
    std::size_t best = clusters.size();
    double best_s = -1.0;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const double s = similarity(x, clusters[k].mean(), w, params.similarity_floor);
        if (s >= params.similarity_threshold && s > best_s) {
            best_s = s;
            best = k;
        }
    }
    return best;
}

std::vector<std::vector<std::size_t>> weight_based_groups(const std::vector<LoadEvent>& events, const Weights& weights,
                                                          const ClusterParams& params) {
    params.validate();
    if (events.empty()) return {};
    auto order = time_order(events);
    if (params.seed_index > 0 && params.seed_index < order.size()) {
        const auto seed = order[params.seed_index];
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(params.seed_index));
        order.insert(order.begin(), seed);
    }

    std::vector<WorkCluster> clusters;
    for (auto i : order) {
        const auto x = event_features(events[i]);
        const auto k = best_match(x, clusters, weights, params);
        if (k == clusters.size()) clusters.push_back({});
        clusters[k].members.push_back(i);
        for (std::size_t f = 0; f < 3; ++f) clusters[k].sum[f] += x[f];
    }

    auto groups_of = [](const std::vector<WorkCluster>& cs) {
        std::vector<std::vector<std::size_t>> groups;
        for (const auto& c : cs) groups.push_back(c.members);
        return groups;
    };

    int iter = 0;
    bool merged = true;
    while (merged) {
        if (++iter > params.max_iter) {
            throw ClusteringError("weight-based clustering did not settle within " + std::to_string(params.max_iter) +
                                      " passes",
                                  to_clusters(events, groups_of(clusters)));
        }
        merged = false;
        std::vector<WorkCluster> next;
        for (const auto& c : clusters) {
            const auto k = best_match(c.mean(), next, weights, params);
            if (k == next.size()) {
                next.push_back(c);
            } else {
                next[k].absorb(c);
                merged = true;
            }
        }
        clusters = std::move(next);
    }
    return order_groups(events, groups_of(clusters));
}

}  // namespace

std::vector<EventCluster> weight_based_cluster(const std::vector<LoadEvent>& events, const Weights& weights,
                                               const ClusterParams& params) {
    return to_clusters(events, weight_based_groups(events, weights, params));
}

std::vector<std::vector<std::size_t>> cluster_groups(const std::vector<LoadEvent>& events, const Weights& weights,
                                                     const ClusterParams& params) {
    if (params.method == ClusterMethod::MeanShift) return mean_shift_groups(events, params);
    return weight_based_groups(events, weights, params);
}

std::vector<EventCluster> cluster_events(const std::vector<LoadEvent>& events, const Weights& weights,
                                         const ClusterParams& params) {
    return to_clusters(events, cluster_groups(events, weights, params));
}

const EventCluster& select_dominant(const std::vector<EventCluster>& clusters, std::size_t min_size) {
    if (clusters.empty()) throw Error(ErrorKind::Insufficient, "insufficient authentic events (no clusters)");
    const EventCluster* best = &clusters.front();
    for (const auto& c : clusters) {
        if (c.size() != best->size()) {
            if (c.size() > best->size()) best = &c;
            continue;
        }
        const double mc = c.total_abs_p();
        const double mb = best->total_abs_p();
        if (mc > mb || (mc == mb && c.first_time() < best->first_time())) best = &c;
    }
    if (best->size() < min_size) {
        throw Error(ErrorKind::Insufficient, "insufficient authentic events (" + std::to_string(best->size()) +
                                                 " < " + std::to_string(min_size) + ")");
    }
    return *best;
}

}  // namespace loadsig
