#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "loadsig/association.hpp"
#include "loadsig/clustering.hpp"
#include "loadsig/eventdetect.hpp"
#include "loadsig/filtration.hpp"
#include "loadsig/meterdata.hpp"

namespace loadsig {

// Clustering defaults used by the pipeline: plain ClusterParams plus a
// 25 var / 1 % similarity floor on Q and THD.
ClusterParams default_pipeline_cluster_params();

struct PipelineParams {
    EdgeDetectParams detect;
    ClusterParams cluster = default_pipeline_cluster_params();
    AssociationParams association;
    BoundaryGuard guard;
    std::size_t min_suspects = 5;
    std::size_t min_authentic = 3;

    void validate() const;  // throws Error(Config)
};

// JSON object with optional "detect", "cluster", "association", "guard",
// "min_suspects" and "min_authentic" members; absent fields keep defaults.
PipelineParams parse_pipeline_params(std::string_view json_text);
PipelineParams load_pipeline_params(const std::filesystem::path& path);
std::string format_pipeline_params(const PipelineParams& params);

struct ApplianceResult {
    ConditionRow row;
    bool found = false;
    std::string reason;  // why not found
    SearchDomain domain;
    std::vector<LoadEvent> suspects;
    std::vector<EventCluster> clusters;
    EventCluster authentic;
    std::vector<AssociatedEventClass> classes;
    CycleSignature cycle;

    std::size_t largest_cluster() const;
    double largest_share() const;  // largest cluster over suspects
};

struct ExtractionResult {
    Epoch epoch;
    std::int64_t start = 0;
    std::int64_t duration = 0;
    PipelineParams params;
    std::size_t event_count = 0;
    std::vector<ApplianceResult> appliances;
};

// Filtration, clustering and association for one table row. Gate failures
// (empty domain, too few suspects or authentic events) come back as
// found == false.
ApplianceResult run_appliance(const MeterRecording& rec, const std::vector<LoadEvent>& events,
                              const ConditionRow& row, const PipelineParams& params);

// Event detection followed by run_appliance for every row.
ExtractionResult extract(const MeterRecording& rec, const std::vector<ConditionRow>& table,
                         const PipelineParams& params);

// One line per appliance: search window, suspects, clusters, largest cluster
// and its share, then the cycle pattern or the reason it was not found.
std::string format_extraction_summary(const ExtractionResult& result);

std::string format_windows(const std::vector<SearchWindow>& windows);

}  // namespace loadsig
