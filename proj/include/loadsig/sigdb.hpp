#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "loadsig/pipeline.hpp"
#include "loadsig/synthhome.hpp"

namespace loadsig {

inline constexpr int kSignatureDbVersion = 1;

// Stored events use file units: THD in percent, absent when unknown.
struct EventRecord {
    std::int64_t t = 0;
    PhaseTag phase = PhaseTag::A;
    Direction direction = Direction::On;
    double dp = 0.0;
    double dq = 0.0;
    std::optional<double> thd_pct;
    bool spike = false;
    bool corrupted = false;

    bool operator==(const EventRecord&) const = default;
};

EventRecord to_record(const LoadEvent& e);

struct ClassMeans {
    double p = 0.0;
    double q = 0.0;
    double thd = 0.0;  // fraction; unknown THD counts as 0

    bool operator==(const ClassMeans&) const = default;
};

// Arithmetic means in member order. Both the database and the evaluator use
// this, so a truth log rebuilt from a database reproduces its means bit for bit.
ClassMeans class_means(const std::vector<EventRecord>& members);

struct ClassRecord {
    std::size_t id = 0;
    Direction direction = Direction::On;
    AssociationType type = AssociationType::Unrelated;
    std::size_t n_total = 0;
    std::size_t n_max = 0;
    double median_offset_s = 0.0;
    ClassMeans means;
    std::vector<std::size_t> per_segment;
    std::vector<EventRecord> members;

    bool operator==(const ClassRecord&) const = default;
};

struct ApplianceRecord {
    ConditionRow row;
    bool found = false;
    std::string reason;
    std::vector<Interval> domain;
    std::size_t suspects = 0;
    std::size_t clusters = 0;
    std::size_t largest = 0;
    std::vector<EventRecord> authentic;
    std::size_t segments_used = 0;
    std::vector<ClassRecord> classes;
    std::vector<std::size_t> steps;  // class ids in cycle order
    std::string pattern;
    bool open_cycle = false;
    bool multiple_off = false;
    std::vector<std::string> warnings;

    bool operator==(const ApplianceRecord&) const = default;
};

struct SignatureDatabase {
    int version = kSignatureDbVersion;
    Epoch epoch;
    std::int64_t start = 0;
    std::int64_t duration = 0;
    std::size_t events_detected = 0;
    PipelineParams params;
    std::vector<ApplianceRecord> appliances;

    const ApplianceRecord* find(std::string_view name) const;
    bool operator==(const SignatureDatabase& o) const;
};

SignatureDatabase make_database(const ExtractionResult& result);

std::string format_database(const SignatureDatabase& db);
SignatureDatabase parse_database(std::string_view json_text);
void save_database(const SignatureDatabase& db, const std::filesystem::path& path);
SignatureDatabase load_database(const std::filesystem::path& path);

// Members of every cycle class as truth events labelled "class<id>".
std::vector<TruthEvent> truth_from_database(const SignatureDatabase& db);

// Reconstructed cycles as step series: one row per pattern step with the
// running appliance power after it.
std::string format_cycles_csv(const SignatureDatabase& db);

// ---------------------------------------------------------------------------
// Evaluation against a truth log

struct ClassEval {
    std::size_t class_id = 0;
    Direction direction = Direction::On;
    AssociationType type = AssociationType::Single;
    ClassMeans extracted;
    bool matched = false;
    std::string truth_state;
    std::size_t truth_count = 0;
    ClassMeans truth;
    // 100 * (extracted - truth) / truth; absent when the truth value is 0.
    std::optional<double> err_p;
    std::optional<double> err_q;
    std::optional<double> err_thd;
};

struct ApplianceEval {
    std::string name;
    bool found = false;
    std::size_t truth_events = 0;
    std::size_t authentic = 0;
    std::size_t authentic_matched = 0;
    std::size_t recall_total = 0;
    std::size_t recall_hit = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::vector<ClassEval> classes;
};

struct EvalParams {
    int match_tolerance_s = 2;   // authentic event to truth event
    int isolation_s = 3;         // other truth events excluded from recall
};

struct EvalReport {
    std::vector<ApplianceEval> appliances;
    std::vector<std::string> truth_only;  // appliances in the log but not in the database
};

EvalReport evaluate(const SignatureDatabase& db, const std::vector<TruthEvent>& truth, EvalParams params = {});
std::string format_eval_json(const EvalReport& report);
std::string format_eval_table(const EvalReport& report);

}  // namespace loadsig
