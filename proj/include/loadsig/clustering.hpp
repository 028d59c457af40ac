#pragma once

#include <array>
#include <vector>

#include "loadsig/error.hpp"
#include "loadsig/filtration.hpp"
#include "loadsig/meterdata.hpp"

namespace loadsig {

enum class ClusterMethod { MeanShift, WeightBased };

std::string_view to_string(ClusterMethod m);
ClusterMethod parse_cluster_method(std::string_view s);

struct ClusterParams {
    ClusterMethod method = ClusterMethod::WeightBased;
    double bandwidth = 10.0;             // normalized units, mean-shift
    double similarity_threshold = 0.8;   // weight-based
    double norm_lo = 1.0;
    double norm_hi = 100.0;
    int max_iter = 500;
    double convergence_eps = 1e-3;
    // Position (in time order) of the event that seeds the first weight-based
    // cluster.
    std::size_t seed_index = 0;
    // Lower bound on the denominator of each relative sub-similarity, in
    // original units (W, var, fraction). Zero reproduces the plain relative
    // deviation; a floor keeps near-zero features from splitting clusters on
    // noise alone.
    std::array<double, 3> similarity_floor{0.0, 0.0, 0.0};
    // Lifts the 5..20 bandwidth range check.
    bool allow_any_bandwidth = false;

    void validate() const;  // throws Error(Config)
};

/// Per-event clustering features in original units. Events of one direction
/// are compared by magnitude: OFF events are negated so an ON/OFF pair of the
/// same load has identical features. Unknown THD counts as 0.
using FeatureVector = std::array<double, 3>;  // P (W), Q (var), THD (fraction)
FeatureVector event_features(const LoadEvent& e);

struct EventCluster {
    std::vector<LoadEvent> members;
    double mean_p = 0.0;    // signed, as the members' dP
    double mean_q = 0.0;
    double mean_thd = 0.0;  // fraction

    std::size_t size() const { return members.size(); }
    std::int64_t first_time() const;
    double total_abs_p() const;
};

// Cluster with means recomputed from `members` (must be non-empty).
EventCluster make_cluster(std::vector<LoadEvent> members);

struct FeatureScaling {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = false;
};

struct NormalizedFeatures {
    std::vector<FeatureVector> rows;
    std::array<FeatureScaling, 3> scaling;
    double lo = 1.0;
    double hi = 100.0;

    FeatureVector inverse(const FeatureVector& normalized) const;
};

// Min-max scaling of each feature to [lo, hi]. Features with no spread map to
// the midpoint and are marked degenerate.
NormalizedFeatures normalize_features(const std::vector<LoadEvent>& events, double lo = 1.0, double hi = 100.0);

/// Thrown when an iterative method hits max_iter; carries the clustering as
/// it stood.
class ClusteringError : public Error {
public:
    ClusteringError(const std::string& what, std::vector<EventCluster> partial)
        : Error(ErrorKind::Convergence, what), partial_(std::move(partial)) {}

    const std::vector<EventCluster>& partial() const { return partial_; }

private:
    std::vector<EventCluster> partial_;
};

// Flat-kernel mean-shift in normalized space. Output sorted by first member
// time.
std::vector<EventCluster> mean_shift_cluster(const std::vector<LoadEvent>& events, const ClusterParams& params);
// Sub-similarity of one feature: 1 - |e - c| / max(|c|, floor), floored at 0.
// When the denominator is 0 it is 1 only for e == 0.
double sub_similarity(double event_value, double cluster_value, double floor = 0.0);
double similarity(const FeatureVector& event, const FeatureVector& cluster_mean, const Weights& w,
                  const FeatureVector& floor = {});

// Sweep-and-merge clustering with weighted P/Q/THD similarity, repeated over
// cluster means until no merge happens. Output sorted by first member time.
std::vector<EventCluster> weight_based_cluster(const std::vector<LoadEvent>& events, const Weights& weights,
                                               const ClusterParams& params);

std::vector<EventCluster> cluster_events(const std::vector<LoadEvent>& events, const Weights& weights,
                                         const ClusterParams& params);

// Same partition as cluster_events, as groups of input indices ordered like
// the clusters. Lets callers keep per-event side data.
std::vector<std::vector<std::size_t>> cluster_groups(const std::vector<LoadEvent>& events, const Weights& weights,
                                                     const ClusterParams& params);

// Largest cluster; ties go to larger total |dP|, then the earlier first event.
// Throws Error(Insufficient, "insufficient authentic events") when the winner
// has fewer than min_size members.
const EventCluster& select_dominant(const std::vector<EventCluster>& clusters, std::size_t min_size);

}  // namespace loadsig
